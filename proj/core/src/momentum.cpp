#include "wxreg/momentum.hpp"

#include "wxreg/errors.hpp"

#include <cmath>
#include <numbers>

namespace wxreg {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::contract: return "contract";
    case SyntheticKind::squeeze: return "squeeze";
    case SyntheticKind::star: return "star";
    case SyntheticKind::teardrop: return "teardrop";
  }
  return "unknown";
}

std::optional<SyntheticKind> parse_synthetic_kind(std::string_view name) {
  for (SyntheticKind k : {SyntheticKind::contract, SyntheticKind::squeeze, SyntheticKind::star, SyntheticKind::teardrop})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

double synthetic_momentum_value(SyntheticKind kind, const Vec2& p) {
  const double x = p.x(), y = p.y();
  switch (kind) {
    case SyntheticKind::contract:
      return -1.38 * kPi;
    case SyntheticKind::squeeze:
      return x < -0.3 ? 0.83 * kPi * std::exp(-y * y / 5.0) : (5.0 / 3.0) * kPi * std::sin(x / 5.0) * std::abs(y);
    case SyntheticKind::star:
      return 2.6 * kPi * std::cos(2.0 * kPi * x / 5.0);
    case SyntheticKind::teardrop:
      // -3 pi sign(y) for y < 0, i.e. 3 pi; y = 0 takes the other branch.
      return y < 0.0 ? 3.0 * kPi : 3.0 * kPi * std::exp(-x * x / 5.0);
  }
  return 0.0;
}

MomentumField synthetic_momentum(SyntheticKind kind, const CurveLoop& curve) {
  MomentumField p(curve.num_facets());
  for (int f = 0; f < curve.num_facets(); ++f) p[f] = synthetic_momentum_value(kind, curve.midpoint0[f]);
  return p;
}

double momentum_norm(std::span<const double> p, const CurveLoop& curve) {
  if (static_cast<int>(p.size()) != curve.num_facets())
    throw ShapeMismatch("momentum has " + std::to_string(p.size()) + " values for " +
                        std::to_string(curve.num_facets()) + " facets");
  double s = 0.0;
  for (int f = 0; f < curve.num_facets(); ++f) s += curve.length0[f] * p[f] * p[f];
  return std::sqrt(s);
}

}  // namespace wxreg
