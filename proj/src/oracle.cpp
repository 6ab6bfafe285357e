#include "ehrelay/oracle.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace ehrelay {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
  }
  return v;
}

struct Best {
  double gain = -1.0;
  long long index = -1;
};

// One pass over the current box; returns the best point in canonical
// (beta-major) order.
class Pass {
 public:
  Pass(const GridSpec& spec, const GridCoord& lo, const GridCoord& hi, double P)
      : betas_(linspace(lo[0], hi[0], spec.n_beta)) {
    const auto s = linspace(lo[1], hi[1], spec.n_power);
    const auto a = linspace(lo[2], hi[2], spec.n_power);
    const auto b = linspace(lo[3], hi[3], spec.n_power);
    const std::size_t m = s.size() * a.size() * b.size();
    p1_.reserve(m);
    p2_.reserve(m);
    pj_.reserve(m);
    for (double si : s) {
      for (double ai : a) {
        for (double bi : b) {
          const Allocation al = allocation_at({0.5, si, ai, bi}, P);
          p1_.push_back(al.P1);
          p2_.push_back(al.P2);
          pj_.push_back(al.PJ);
          coords_.push_back({0.0, si, ai, bi});
        }
      }
    }
  }

  [[nodiscard]] Best run(const kernels::SecrecyConstants& k, kernels::Isa isa) const {
    const std::size_t nb = betas_.size();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t nthreads = std::min<std::size_t>(hw, nb);
    std::vector<Best> partial(nthreads);
    {
      std::vector<std::jthread> workers;
      for (std::size_t t = 0; t < nthreads; ++t) {
        workers.emplace_back([&, t] {
          std::vector<double> beta(p1_.size());
          std::vector<double> out(p1_.size());
          Best local;
          for (std::size_t ib = t; ib < nb; ib += nthreads) {
            std::fill(beta.begin(), beta.end(), betas_[ib]);
            kernels::secrecy_gain(isa, k, {beta, p1_, p2_, pj_}, out);
            for (std::size_t j = 0; j < out.size(); ++j) {
              const auto idx = static_cast<long long>(ib * out.size() + j);
              if (out[j] > local.gain || (out[j] == local.gain && idx < local.index)) {
                local = {out[j], idx};
              }
            }
          }
          partial[t] = local;
        });
      }
    }
    Best best;
    for (const Best& b : partial) {
      if (b.index < 0) continue;
      if (b.gain > best.gain || (b.gain == best.gain && b.index < best.index)) best = b;
    }
    return best;
  }

  [[nodiscard]] GridCoord coord(long long index) const {
    const auto per_beta = static_cast<long long>(coords_.size());
    GridCoord c = coords_[static_cast<std::size_t>(index % per_beta)];
    c[0] = betas_[static_cast<std::size_t>(index / per_beta)];
    return c;
  }

 private:
  std::vector<double> betas_;
  std::vector<double> p1_, p2_, pj_;
  std::vector<GridCoord> coords_;
};

}  // namespace

void GridSpec::validate() const {
  if (n_beta < 2 || n_power < 2) throw ContractError("grid needs at least two points per axis");
  if (refinement_levels < 1) throw ContractError("refinement_levels must be at least 1");
  if (!(zoom > 1.0)) throw ContractError("zoom factor must exceed 1");
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(lower[i] <= upper[i])) throw ContractError("grid box has lower > upper");
  }
  if (!(lower[0] >= 0.0 && upper[0] <= 1.0)) throw ContractError("beta range must lie in [0,1]");
  for (std::size_t i = 1; i < 4; ++i) {
    if (!(lower[i] >= 0.0 && upper[i] <= 1.0)) throw ContractError("power coordinates lie in [0,1]");
  }
}

long long GridSpec::points_per_level() const {
  return static_cast<long long>(n_beta) * n_power * n_power * n_power;
}

Allocation allocation_at(const GridCoord& c, double P) {
  const double total = c[1] * P;
  const double p1 = total * c[2];
  const double rest = total * (1.0 - c[2]);
  return Allocation::with_beta(p1, rest * c[3], rest * (1.0 - c[3]), c[0]);
}

GridCoord coord_of(const Allocation& a, double P) {
  const double total = a.total_power();
  const double s = P > 0.0 ? total / P : 0.0;
  const double frac1 = total > 0.0 ? a.P1 / total : 0.0;
  const double rest = a.P2 + a.PJ;
  const double b = rest > 0.0 ? a.P2 / rest : 0.0;
  return {a.beta, s, frac1, b};
}

SgpResult grid_search(const ChannelRealization& ch, const SystemParams& sys,
                      const std::optional<CsiErrorBounds>& err, const GridSpec& grid,
                      kernels::Isa isa) {
  grid.validate();
  const kernels::SecrecyConstants k = kernels::SecrecyConstants::make(ch, sys, err);

  GridCoord lo = grid.lower;
  GridCoord hi = grid.upper;
  double best_gain = -1.0;
  GridCoord best_coord{};
  SgpResult result;

  for (int level = 0; level <= grid.refinement_levels; ++level) {
    const Pass pass(grid, lo, hi, sys.P);
    const Best b = pass.run(k, isa);
    if (b.index >= 0 && b.gain > best_gain) {
      best_gain = b.gain;
      best_coord = pass.coord(b.index);
    }
    result.trace.push_back(kernels::rate_from_gain(best_gain));
    ++result.iterations;

    for (std::size_t i = 0; i < 4; ++i) {
      const double half = (hi[i] - lo[i]) / (2.0 * grid.zoom);
      double nlo = best_coord[i] - half;
      double nhi = best_coord[i] + half;
      if (nlo < grid.lower[i]) {
        nhi += grid.lower[i] - nlo;
        nlo = grid.lower[i];
      }
      if (nhi > grid.upper[i]) {
        nlo -= nhi - grid.upper[i];
        nhi = grid.upper[i];
      }
      lo[i] = std::max(nlo, grid.lower[i]);
      hi[i] = nhi;
    }
  }

  result.total_iterations = result.iterations;
  result.converged = true;
  result.best_alloc = allocation_at(best_coord, sys.P);
  result.outcome = secrecy_outcome(result.best_alloc, ch, sys, err);
  result.best_case = result.outcome.case_id;
  result.c_sum = result.outcome.c_sum;
  result.beta_sum = result.best_alloc.beta + result.best_alloc.beta_tilde;
  return result;
}

}  // namespace ehrelay
