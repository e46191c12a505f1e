#pragma once

#include <string>

namespace histcad {

/// Shortest decimal text that parses back to exactly `v`. Negative zero is
/// rendered as "0" so structurally equal values print identically.
std::string format_number(double v);

/// `v` rounded to `digits` significant digits, printed shortest.
std::string format_significant(double v, int digits);

/// Rounds `v` to the nearest multiple of `step` (step > 0).
double quantize(double v, double step);

}  // namespace histcad
