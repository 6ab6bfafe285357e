#pragma once

// Exhaustive grid search over (beta, P1, P2, PJ) that maximizes the
// sum-secrecy rate directly. Slow by construction; used to check the SGP
// optimizer and to produce reference values.
//
// Powers are sampled through the map
//   P1 = s*P*a,  P2 = s*P*(1-a)*b,  PJ = s*P*(1-a)*(1-b),   s, a, b in [0,1],
// which covers the whole simplex P1 + P2 + PJ <= P including its faces
// (s = 1 is the full-budget face, b = 1 gives PJ = 0) and its vertices.

#include <array>
#include <optional>

#include "ehrelay/core_model.hpp"
#include "ehrelay/kernels/secrecy_kernel.hpp"
#include "ehrelay/sgp.hpp"

namespace ehrelay {

/// Search-box coordinates (beta, s, a, b).
using GridCoord = std::array<double, 4>;

struct GridSpec {
  int n_beta = 50;
  int n_power = 50;           ///< points per power coordinate (s, a, b)
  int refinement_levels = 3;  ///< zoom passes after the base grid
  double zoom = 4.0;          ///< box shrink factor per refinement
  GridCoord lower{1e-3, 0.0, 0.0, 0.0};
  GridCoord upper{1.0 - 1e-3, 1.0, 1.0, 1.0};

  void validate() const;
  /// Evaluated points per pass.
  [[nodiscard]] long long points_per_level() const;
};

[[nodiscard]] Allocation allocation_at(const GridCoord& c, double P);
/// Inverse of allocation_at for P > 0.
[[nodiscard]] GridCoord coord_of(const Allocation& a, double P);

/// Returns the best grid point as an SgpResult: `iterations` counts passes and
/// `trace` holds the incumbent rate after each pass (non-decreasing).
[[nodiscard]] SgpResult grid_search(const ChannelRealization& ch, const SystemParams& sys,
                                    const std::optional<CsiErrorBounds>& err,
                                    const GridSpec& grid = {},
                                    kernels::Isa isa = kernels::detect_isa());

}  // namespace ehrelay
