#pragma once

#include <array>
#include <functional>

#include "fpsi/mesh.hpp"

namespace fpsi {

using TimeScalarFunction = std::function<double(double t, Point2 x)>;
using TimeVectorFunction = std::function<std::array<double, 2>(double t, Point2 x)>;
/// Boundary traction sigma n for outward normal n on an edge carrying `tag`.
using TractionFunction = std::function<std::array<double, 2>(double t, Point2 x, Point2 n, BoundaryTag tag)>;

}  // namespace fpsi
