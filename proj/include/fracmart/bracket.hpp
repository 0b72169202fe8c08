#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fracmart/bellman_dp.hpp"
#include "fracmart/search.hpp"
#include "fracmart/supersolution.hpp"

namespace fracmart {

struct SandwichCell {
  std::size_t cell = 0;
  double x = 0.0;
  double y = 0.0;
  double dp = 0.0;
  double G = 0.0;
};

struct BracketReport {
  std::size_t cells_checked = 0;
  std::size_t sandwich_violations = 0;   // dp > G beyond tolerance
  double max_normalized_excess = -std::numeric_limits<double>::infinity();  // (dp - G)/scale
  std::vector<SandwichCell> violations;  // first few offenders
  std::size_t boundary_cells = 0;
  std::size_t boundary_violations = 0;   // dp or G below Φ(y) at |x| = 1
  double z0_max_deviation = 0.0;         // |G(0,y,0) - Φ(y)| on the grid ys
  double lower_search = 0.0;             // best explicit ratio
  double lower_dp = 0.0;                 // max_x dp(x, 0): B(x,0,1) >= it
  double upper = std::numeric_limits<double>::infinity();
  bool ordered = false;                  // max(lower) <= upper
  bool pass = false;
};

/// Juxtaposes the dp lower bounds, the search ratio and the fitted majorant G.
/// `upper` is the two-sided constant; pass it in when both signs were fitted,
/// otherwise the one-sided G(·, 0, 1) is used.
inline BracketReport bracket_report(const InequalityContext& ctx, const GridSlice& dp, const SearchState& search,
                                    const SupersolutionParams& params, std::optional<double> upper = std::nullopt) {
  detail::require_dp_instance(ctx);
  if (search.witness.m() != ctx.m() && search.best_restart >= 0)
    throw std::invalid_argument("bracket: search witness belongs to a different instance");
  const auto& g = dp.geometry;
  if (dp.values.size() != g.cells() || dp.flags.size() != g.cells())
    throw std::invalid_argument("bracket: dp slice does not match its geometry");
  const Supersolution G(ctx, params);
  const auto& phi = ctx.phi();
  BracketReport r;
  for (int a = 0; a < g.nx; ++a)
    for (int b = 0; b < g.ny; ++b) {
      const std::size_t c = g.index(a, b);
      const double y = g.y(b);
      const double gv = G.unchecked(y, 1.0);
      const double ph = phi(y);
      const bool boundary = a == 0 || a == g.nx - 1;
      if (boundary) {
        ++r.boundary_cells;
        if (gv < ph - 1e-12 * std::max(1.0, std::abs(ph))) ++r.boundary_violations;
      }
      if (!dp.set(c)) continue;
      ++r.cells_checked;
      const double v = dp.values[c];
      if (boundary && v < ph - 1e-12 * std::max(1.0, std::abs(ph))) ++r.boundary_violations;
      const double scale = std::max(1.0, std::abs(v) + std::abs(gv));
      const double excess = (v - gv) / scale;
      r.max_normalized_excess = std::max(r.max_normalized_excess, excess);
      if (excess > 1e-9) {
        ++r.sandwich_violations;
        if (r.violations.size() < 20) r.violations.push_back({c, g.x(a), y, v, gv});
      }
      if (b == g.ny / 2) r.lower_dp = std::max(r.lower_dp, v);
    }
  for (int b = 0; b < g.ny; ++b) {
    const double y = g.y(b);
    r.z0_max_deviation = std::max(r.z0_max_deviation, std::abs(G.unchecked(y, 0.0) - phi(y)));
  }
  r.lower_search = search.best_ratio;
  r.upper = upper ? *upper : G.upper_constant();
  r.ordered = std::max(r.lower_search, r.lower_dp) <= r.upper;
  r.pass = r.ordered && r.sandwich_violations == 0 && r.boundary_violations == 0 && r.z0_max_deviation == 0.0;
  return r;
}

}  // namespace fracmart
