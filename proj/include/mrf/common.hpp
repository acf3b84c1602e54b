#ifndef MRF_COMMON_HPP
#define MRF_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrf {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---- error taxonomy ------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct PreconditionError : Error {
    using Error::Error;
};

struct OutOfDomainError : Error {
    using Error::Error;
};

struct RangeError : Error {
    using Error::Error;
};

struct GeometryError : Error {
    using Error::Error;
};

struct ConstructionError : Error {
    using Error::Error;
};

struct DegenerateStencilError : Error {
    using Error::Error;
};

struct StuckError : Error {
    StuckError(const std::string& msg, Vec where) : Error(msg), position(std::move(where)) {}
    Vec position;
};

struct IntegrationDivergedError : Error {
    IntegrationDivergedError(const std::string& msg, double t) : Error(msg), last_valid_time(t) {}
    double last_valid_time;
};

struct ConfigError : Error {
    ConfigError(const std::string& msg, int line_no = 0) : Error(msg), line(line_no) {}
    int line;
};

// ---- small numeric helpers -----------------------------------------------

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dist2(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// Canonical float-to-text used in every CSV writer. %.17g round-trips
// doubles, so identical values serialize to identical bytes.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string fmt_g6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

}  // namespace mrf

#endif
