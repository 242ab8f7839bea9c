#pragma once

#include "wxreg/mesh.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wxreg {

/// One momentum value per curve facet (density per unit template arc length).
/// The momentum vector on facet f is normal0[f] * value.
using MomentumField = std::vector<double>;

enum class SyntheticKind { contract, squeeze, star, teardrop };

std::string_view to_string(SyntheticKind kind);
std::optional<SyntheticKind> parse_synthetic_kind(std::string_view name);

/// Value of the synthetic momentum at a template point.
double synthetic_momentum_value(SyntheticKind kind, const Vec2& x);

/// Synthetic momentum sampled at the template facet midpoints.
MomentumField synthetic_momentum(SyntheticKind kind, const CurveLoop& curve);

/// sqrt(sum_f L0_f p_f^2). Throws ShapeMismatch.
double momentum_norm(std::span<const double> p, const CurveLoop& curve);

}  // namespace wxreg
