#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "toa/arrivals.hpp"

namespace fixture {

inline const toa::PhysicalUnits units{};
inline const toa::GaussianSpec packet{-6.0, 6.0, 1.0};
inline const toa::GaussianSpec slow_packet{-9.0, 3.0, 1.0};
inline toa::PiecewisePotential barrier() { return toa::PiecewisePotential::square_barrier(10.0, 0.0, 10.0); }

inline toa::PhaseBudget budget(double t_reach, double x_reach) {
  toa::PhaseBudget b;
  b.t_reach = t_reach;
  b.x_reach = x_reach;
  return b;
}

inline toa::AsymptoteAmplitude asymptote(const toa::GaussianSpec& spec, const toa::PiecewisePotential& pot,
                                         double t_reach, double x_reach) {
  const auto grid = toa::packet_momentum_grid(spec, pot, budget(t_reach, x_reach), units);
  return toa::gaussian_asymptote(spec, grid, units);
}

// Packet asymptote and Pi_1 grids sized the way a scenario run sizes them.
struct Setup {
  toa::AsymptoteAmplitude phi;
  toa::Pi1Numerics numerics;
};

inline Setup pi1_setup(const toa::GaussianSpec& spec, const toa::PiecewisePotential& pot,
                       std::vector<double> xs, double t_max, double cutoff = 30.0,
                       double tolerance = toa::kTruncationTolerance) {
  const auto edges = pot.edges();
  std::vector<double> must = edges;
  must.insert(must.end(), xs.begin(), xs.end());
  const auto [lo, hi] = toa::packet_extent(spec, t_max, must, units);
  const auto win = toa::packet_window(spec, units);
  const double kmax = cutoff + std::max(std::abs(win.lo), std::abs(win.hi));
  auto space = toa::build_spatial_grid(lo, hi, edges, kmax);
  Setup s{asymptote(spec, pot, t_max, std::max(std::abs(lo), std::abs(hi))),
          toa::make_pi1_numerics(std::move(space), cutoff, xs, units, tolerance)};
  return s;
}

inline double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace fixture
