#include "histcad/numfmt.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace histcad {

std::string format_number(double v) {
    if (v == 0.0) {
        return "0";
    }
    if (!std::isfinite(v)) {
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_significant(double v, int digits) {
    if (v == 0.0 || !std::isfinite(v)) return format_number(v);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, v);
    return format_number(std::strtod(buf, nullptr));
}

double quantize(double v, double step) {
    const double q = std::round(v / step) * step;
    return q == 0.0 ? 0.0 : q;
}

}  // namespace histcad
