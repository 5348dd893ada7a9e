#include "parcap/cache.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace parcap {

namespace fs = std::filesystem;

SolveCache::SolveCache(std::string dir) : dir_(std::move(dir)) {
    if (const char* env = std::getenv("PARCAP_CACHE"); env && *env) dir_ = env;
    if (!dir_.empty()) fs::create_directories(dir_);
}

fs::path SolveCache::entry_path(std::uint64_t key) const {
    return fs::path(dir_) / (hash_hex(key) + ".json");
}

std::optional<std::string> SolveCache::get(std::uint64_t key) const {
    if (!enabled()) return std::nullopt;
    std::ifstream is(entry_path(key));
    if (!is) {
        ++misses_;
        return std::nullopt;
    }
    try {
        auto j = nlohmann::json::parse(is);
        const std::string payload = j.at("payload").get<std::string>();
        if (j.at("key").get<std::string>() != hash_hex(key) ||
            j.at("payload_hash").get<std::string>() != hash_hex(fnv1a64(payload))) {
            ++misses_;  // corrupted entry: recompute
            return std::nullopt;
        }
        ++hits_;
        return payload;
    } catch (...) {
        ++misses_;
        return std::nullopt;
    }
}

void SolveCache::put(std::uint64_t key, const std::string& payload) {
    if (!enabled()) return;
    std::lock_guard<std::mutex> lock(write_mutex_);
    nlohmann::ordered_json j;
    j["key"] = hash_hex(key);
    j["payload_hash"] = hash_hex(fnv1a64(payload));
    j["payload"] = payload;
    const fs::path path = entry_path(key);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        os << j.dump();
    }
    fs::rename(tmp, path);  // idempotent by content hash
}

}  // namespace parcap
