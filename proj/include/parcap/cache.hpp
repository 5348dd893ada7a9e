#pragma once

#include <filesystem>
#include <atomic>
#include <mutex>
#include <optional>
#include <string>

#include "parcap/common.hpp"

namespace parcap {

// ---------------------------------------------------------------------------
// Content-addressed solve cache: entries are JSON files named by the key
// hash, carrying a payload hash that is verified on read (corruption means a
// recompute, never a wrong answer). Reads are lock-free; inserts exclusive.
// ---------------------------------------------------------------------------

class SolveCache {
public:
    /// Disabled cache when dir is empty. The PARCAP_CACHE environment
    /// variable overrides `dir` when set.
    explicit SolveCache(std::string dir);

    bool enabled() const { return !dir_.empty(); }
    const std::string& dir() const { return dir_; }

    std::optional<std::string> get(std::uint64_t key) const;
    void put(std::uint64_t key, const std::string& payload);

    long hits() const { return hits_; }
    long misses() const { return misses_; }

private:
    std::filesystem::path entry_path(std::uint64_t key) const;
    std::string dir_;
    std::mutex write_mutex_;
    mutable std::atomic<long> hits_{0}, misses_{0};
};

}  // namespace parcap
