#pragma once

// Hand-built sketches shared by unit and acceptance tests.

#include "histcad/model.hpp"

#include <string>
#include <vector>

namespace histcad::testing {

struct ConstraintCase {
    std::string name;
    ConstraintKind kind;
    /// Each sketch carries exactly one constraint.
    Sketch satisfied;
    Sketch violated;
};

/// At least one case per constraint kind, several for kinds with more than
/// one reference shape (line/circle, circle/circle, arc).
std::vector<ConstraintCase> constraint_cases();

/// Rotates by `angle` about the origin, scales by `scale`, then translates.
/// Fix values are moved along with the geometry.
Sketch transform_sketch(const Sketch& s, double angle, const Vec2& t, double scale = 1.0);

/// Unit square L1..L4 (counter-clockwise from the origin) with coincident
/// corners, L1/L3 horizontal and L2/L4 vertical.
Sketch constrained_square();

/// Two concentric circles C1 (r 1) and C2 (r 1.5) under Equal and Concentric.
Sketch concentric_equal_circles();

}  // namespace histcad::testing
