#pragma once

#include <cstdint>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parcap {

// ---------------------------------------------------------------------------
// Errors. The core throws; the C API boundary translates to status codes.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// Newton / active-set non-convergence, carrying where it happened.
class SolverDiverged : public Error {
public:
    SolverDiverged(const std::string& what, int time_step, double last_residual)
        : Error(what), time_step(time_step), last_residual(last_residual) {}
    int time_step = -1;
    double last_residual = 0.0;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Exact rational exponent p = k/l. The dyadic parabolic grid needs p rational;
// k and l are kept coprime.
// ---------------------------------------------------------------------------

struct Rational {
    int num = 3;  // k
    int den = 1;  // l

    Rational() = default;
    Rational(int k, int l) : num(k), den(l) {
        if (l <= 0 || k <= 0) throw InvalidArgument("rational exponent must be positive");
        const int g = std::gcd(k, l);
        num = k / g;
        den = l / g;
    }

    double value() const { return static_cast<double>(num) / den; }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

/// Parses "3" or "5/2". Throws InvalidArgument on anything else.
Rational parse_rational(std::string_view text);

// ---------------------------------------------------------------------------
// Small numeric helpers shared across modules.
// ---------------------------------------------------------------------------

inline double sqr(double x) { return x * x; }

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares slope of log(y) against log(x); entries with y <= 0 are an error.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// FNV-1a 64-bit over bytes; used for cache keys and content checks.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 1469598103934665603ull);

/// Hex string of a 64-bit hash.
std::string hash_hex(std::uint64_t h);

/// Fixed float formatting (shortest round-trippable-ish, locale independent),
/// shared by every emitter so reports are byte-stable.
std::string format_double(double v);

}  // namespace parcap
