#include "toa/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace toa {

void PhysicalUnits::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw std::invalid_argument("hbar must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw std::invalid_argument("mass must be positive");
}

GaussLegendreRule gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussLegendreRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Newton on P_n from the Tricomi estimate of the i-th largest root.
    double z = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / static_cast<double>(j + 1);
      }
      dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // One more derivative evaluation at the converged root.
    double p1 = 1.0, p2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / static_cast<double>(j + 1);
    }
    dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

template <class Tag>
QuadratureGrid<Tag> QuadratureGrid<Tag>::from_panels(std::span<const PanelSpec> panels) {
  if (panels.empty()) throw std::invalid_argument("quadrature grid needs at least one panel");
  QuadratureGrid grid;
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const double a = panels[k].lo, b = panels[k].hi;
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
      throw std::invalid_argument("quadrature panel needs finite lo < hi");
    if (k > 0 && a < panels[k - 1].hi)
      throw std::invalid_argument("quadrature panels must be ordered and non-overlapping");
    if (panels[k].count == 0) throw std::invalid_argument("quadrature panel without nodes");
    const auto rule = gauss_legendre(panels[k].count);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    grid.panels_.push_back({a, b, grid.nodes_.size(), panels[k].count});
    for (std::size_t i = 0; i < panels[k].count; ++i) {
      grid.nodes_.push_back(mid + half * rule.nodes[i]);
      grid.weights_.push_back(half * rule.weights[i]);
    }
  }
  return grid;
}

template <class Tag>
QuadratureGrid<Tag> QuadratureGrid<Tag>::composite(std::span<const double> breaks,
                                                   std::span<const std::size_t> counts) {
  if (breaks.size() < 2 || counts.size() != breaks.size() - 1)
    throw std::invalid_argument("composite grid: need one count per panel");
  std::vector<PanelSpec> panels;
  for (std::size_t k = 0; k < counts.size(); ++k) panels.push_back({breaks[k], breaks[k + 1], counts[k]});
  return from_panels(panels);
}

template <class Tag>
bool QuadratureGrid<Tag>::split_at_zero() const {
  return std::none_of(panels_.begin(), panels_.end(),
                      [](const Panel& p) { return p.lo < 0.0 && p.hi > 0.0; });
}

template class QuadratureGrid<MomentumTag>;
template class QuadratureGrid<PositionTag>;

namespace {

// Splits n nodes over `panels` equal-width panels of [a, b].
void append_uniform_panels(double a, double b, std::size_t n, std::vector<double>& breaks,
                           std::vector<std::size_t>& counts) {
  const std::size_t panels = std::max<std::size_t>(1, (n + kPanelNodes - 1) / kPanelNodes);
  const std::size_t base = n / panels, extra = n % panels;
  if (breaks.empty()) breaks.push_back(a);
  for (std::size_t k = 0; k < panels; ++k) {
    const double hi = (k + 1 == panels) ? b : a + (b - a) * static_cast<double>(k + 1) / panels;
    breaks.push_back(hi);
    counts.push_back(base + (k < extra ? 1 : 0));
  }
}

}  // namespace

MomentumGrid build_momentum_grid(double center, double halfwidth, std::size_t count) {
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth) || !std::isfinite(center))
    throw std::invalid_argument("build_momentum_grid: halfwidth must be positive");
  if (count < 16) throw std::invalid_argument("build_momentum_grid: count must be at least 16");
  const double lo = center - halfwidth, hi = center + halfwidth;
  std::vector<double> breaks;
  std::vector<std::size_t> counts;
  if (lo < 0.0 && hi > 0.0) {
    auto left = static_cast<std::size_t>(
        std::llround(static_cast<double>(count) * (-lo) / (hi - lo)));
    left = std::clamp<std::size_t>(left, 8, count - 8);
    append_uniform_panels(lo, 0.0, left, breaks, counts);
    append_uniform_panels(0.0, hi, count - left, breaks, counts);
  } else {
    append_uniform_panels(lo, hi, count, breaks, counts);
  }
  return MomentumGrid::composite(breaks, counts);
}

double panel_oscillations(const Panel& panel, double t, double x_reach,
                          const PhysicalUnits& units) {
  const double a = panel.lo, b = panel.hi;
  double e_min = std::min(units.energy(a), units.energy(b));
  const double e_max = std::max(units.energy(a), units.energy(b));
  if (a < 0.0 && b > 0.0) e_min = 0.0;
  const double phase = ((e_max - e_min) * std::abs(t) + (b - a) * std::abs(x_reach)) / units.hbar;
  return phase / (2.0 * pi);
}

namespace {

// Panels of [a, b] (same sign, a < b) sized from the end nearest p = 0.
void append_resolved_side(double a, double b, const PhaseBudget& budget,
                          const PhysicalUnits& units, std::vector<double>& breaks,
                          std::vector<std::size_t>& counts) {
  const double target = 2.0 * pi * static_cast<double>(kPanelNodes) / kNodesPerOscillation;
  const double alpha = std::abs(budget.t_reach) / (2.0 * units.mass * units.hbar);
  const double beta = std::abs(budget.x_reach) / units.hbar;
  const bool ascending = a >= 0.0;  // march away from zero
  double from = ascending ? a : b;
  const double to = ascending ? b : a;
  std::vector<double> local{from};
  while (std::abs(to - from) > 0.0) {
    // alpha * w * (2|from| + w) + beta * w = target
    const double lin = 2.0 * alpha * std::abs(from) + beta;
    double w;
    if (alpha > 0.0) {
      w = (-lin + std::sqrt(lin * lin + 4.0 * alpha * target)) / (2.0 * alpha);
    } else if (beta > 0.0) {
      w = target / beta;
    } else {
      w = std::numeric_limits<double>::infinity();
    }
    w = std::min(w, budget.max_panel_width);
    const double remaining = std::abs(to - from);
    // Avoid a sliver panel at the end.
    if (w >= remaining)
      w = remaining;
    else if (remaining - w < 0.25 * w)
      w = 0.5 * remaining;
    from = ascending ? std::min(to, from + w) : std::max(to, from - w);
    if (std::abs(to - from) < 1e-14 * std::max(1.0, std::abs(to))) from = to;
    local.push_back(from);
  }
  if (!ascending) std::reverse(local.begin(), local.end());
  if (breaks.empty()) breaks.push_back(local.front());
  for (std::size_t k = 1; k < local.size(); ++k) {
    breaks.push_back(local[k]);
    counts.push_back(kPanelNodes);
  }
}

}  // namespace

MomentumGrid build_resolved_momentum_grid(double lo, double hi, const PhaseBudget& budget,
                                          const PhysicalUnits& units) {
  units.validate();
  if (!(hi > lo)) throw std::invalid_argument("build_resolved_momentum_grid: empty interval");
  if (!(budget.max_panel_width > 0.0))
    throw std::invalid_argument("build_resolved_momentum_grid: max_panel_width must be positive");
  std::vector<double> breaks;
  std::vector<std::size_t> counts;
  if (lo < 0.0 && hi > 0.0) {
    append_resolved_side(lo, 0.0, budget, units, breaks, counts);
    append_resolved_side(0.0, hi, budget, units, breaks, counts);
  } else {
    append_resolved_side(lo, hi, budget, units, breaks, counts);
  }
  return MomentumGrid::composite(breaks, counts);
}

void check_phase_resolution(const MomentumGrid& grid, double t, double x_reach,
                            const PhysicalUnits& units) {
  for (const auto& panel : grid.panels()) {
    const double osc = panel_oscillations(panel, t, x_reach, units);
    if (static_cast<double>(panel.count) < kNodesPerOscillation * osc * (1.0 - 1e-9)) {
      std::ostringstream msg;
      msg << "momentum panel [" << panel.lo << ", " << panel.hi << "] has " << panel.count
          << " nodes for " << osc << " oscillations at t = " << t << ", |x| <= " << x_reach
          << " (need " << kNodesPerOscillation << " per oscillation)";
      throw std::domain_error(msg.str());
    }
  }
}

namespace {

std::vector<double> interior_breaks(double lo, double hi, std::span<const double> breaks) {
  std::vector<double> out;
  for (double b : breaks)
    if (b > lo && b < hi) out.push_back(b);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

SpatialGrid build_spatial_grid(double lo, double hi, std::span<const double> breaks,
                               double max_wavenumber) {
  if (!(hi > lo)) throw std::invalid_argument("build_spatial_grid: empty interval");
  if (!(max_wavenumber > 0.0)) throw std::invalid_argument("build_spatial_grid: wavenumber must be positive");
  const double width = 2.0 * pi * (static_cast<double>(kPanelNodes) / kNodesPerOscillation) / max_wavenumber;
  std::vector<double> cuts{lo};
  for (double b : interior_breaks(lo, hi, breaks)) cuts.push_back(b);
  cuts.push_back(hi);
  std::vector<double> out{lo};
  std::vector<std::size_t> counts;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / width));
    for (std::size_t j = 1; j <= panels; ++j) {
      out.push_back(j == panels ? b : a + (b - a) * static_cast<double>(j) / panels);
      counts.push_back(kPanelNodes);
    }
  }
  return SpatialGrid::composite(out, counts);
}

SpatialGrid build_spatial_grid_with_count(double lo, double hi, std::span<const double> breaks,
                                          std::size_t count) {
  if (!(hi > lo)) throw std::invalid_argument("build_spatial_grid: empty interval");
  if (count < kPanelNodes) throw std::invalid_argument("build_spatial_grid: too few nodes");
  const auto panels = (count + kPanelNodes - 1) / kPanelNodes;
  std::vector<double> cuts;
  for (std::size_t j = 0; j <= panels; ++j)
    cuts.push_back(j == panels ? hi : lo + (hi - lo) * static_cast<double>(j) / panels);
  for (double b : interior_breaks(lo, hi, breaks)) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out{cuts.front()};
  for (std::size_t k = 1; k < cuts.size(); ++k)
    if (cuts[k] - out.back() > 1e-9 * (hi - lo)) out.push_back(cuts[k]);
  out.back() = hi;
  std::vector<std::size_t> counts(out.size() - 1, kPanelNodes);
  return SpatialGrid::composite(out, counts);
}

template <class Tag>
cplx integrate(std::span<const cplx> samples, const QuadratureGrid<Tag>& grid) {
  if (samples.size() != grid.size()) throw std::invalid_argument("integrate: length mismatch");
  cplx sum{};
  const auto& w = grid.weights();
  for (std::size_t i = 0; i < samples.size(); ++i) sum += w[i] * samples[i];
  return sum;
}

template <class Tag>
double integrate(std::span<const double> samples, const QuadratureGrid<Tag>& grid) {
  if (samples.size() != grid.size()) throw std::invalid_argument("integrate: length mismatch");
  return std::inner_product(samples.begin(), samples.end(), grid.weights().begin(), 0.0);
}

template cplx integrate(std::span<const cplx>, const MomentumGrid&);
template cplx integrate(std::span<const cplx>, const SpatialGrid&);
template double integrate(std::span<const double>, const MomentumGrid&);
template double integrate(std::span<const double>, const SpatialGrid&);

TimeGrid::TimeGrid(double t_min, double t_max, std::size_t count)
    : t_min_(t_min), t_max_(t_max), count_(count) {
  if (!std::isfinite(t_min) || !std::isfinite(t_max) || !(t_min < t_max))
    throw std::invalid_argument("TimeGrid: need t_min < t_max");
  if (count < 2) throw std::invalid_argument("TimeGrid: count must be at least 2");
}

double TimeGrid::operator[](std::size_t i) const {
  if (i + 1 == count_) return t_max_;
  return t_min_ + (t_max_ - t_min_) * static_cast<double>(i) / static_cast<double>(count_ - 1);
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(count_);
  for (std::size_t i = 0; i < count_; ++i) out[i] = (*this)[i];
  return out;
}

}  // namespace toa
