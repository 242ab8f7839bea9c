#pragma once

#include "wxreg/types.hpp"

#include <array>
#include <span>
#include <vector>

namespace wxreg::detail {

/// Incremental Bowyer-Watson triangulation of points inside an axis-aligned
/// box. The first four points must be the box corners; the remaining points
/// may lie on the box sides or strictly inside. Points are inserted in the
/// given order. Returns counterclockwise vertex triples.
/// Throws GenerationFailure if a cavity turns out not to be star-shaped.
std::vector<std::array<int, 3>> delaunay_in_box(std::span<const Vec2> points);

}  // namespace wxreg::detail
