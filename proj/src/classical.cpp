#include "toa/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace toa {

namespace {

struct Layout {
  std::vector<double> edges;
  std::vector<double> heights;  // heights[k] on (edges[k-1], edges[k])
};

Layout layout_of(const PiecewisePotential& potential) {
  Layout l;
  l.edges = potential.edges();
  const std::size_t n = l.edges.size();
  l.heights.resize(n + 1, 0.0);
  for (std::size_t k = 1; k < n; ++k) l.heights[k] = potential(0.5 * (l.edges[k - 1] + l.edges[k]));
  return l;
}

// Region index of x for a particle moving with momentum sign s.
std::size_t region_of(const Layout& l, double x, double p) {
  auto k = static_cast<std::size_t>(std::upper_bound(l.edges.begin(), l.edges.end(), x) - l.edges.begin());
  if (k > 0 && l.edges[k - 1] == x && p < 0.0) --k;
  return k;
}

double kernel(double u, double h) {
  return std::exp(-0.5 * (u / h) * (u / h)) / (h * std::sqrt(2.0 * pi));
}

}  // namespace

void ClassicalEnsemble::validate() const {
  if (samples.empty()) throw std::invalid_argument("ensemble is empty");
  // Kahan summation; large ensembles of equal weights drift otherwise
  double total = 0.0, carry = 0.0;
  for (const auto& s : samples) {
    if (!(s.w > 0.0)) throw std::invalid_argument("ensemble weights must be positive");
    if (!std::isfinite(s.x) || !std::isfinite(s.p)) throw std::invalid_argument("ensemble sample not finite");
    const double y = s.w - carry;
    const double next = total + y;
    carry = (next - total) - y;
    total = next;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("ensemble weights must sum to 1");
}

ClassicalEnsemble sample_gaussian_ensemble(const GaussianSpec& spec, std::size_t count,
                                           std::uint64_t seed, const PhysicalUnits& units) {
  spec.validate();
  units.validate();
  if (count == 0) throw std::invalid_argument("ensemble needs at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> x_dist(spec.x0, spec.dx);
  std::normal_distribution<double> p_dist(spec.p0, spec.dp(units));
  ClassicalEnsemble e;
  e.samples.reserve(count);
  const double w = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = x_dist(rng);
    const double p = p_dist(rng);
    e.samples.push_back({x, p, w});
  }
  return e;
}

Trajectory trace_trajectory(double x, double p, const PiecewisePotential& potential, double t_max,
                            const PhysicalUnits& units) {
  units.validate();
  if (!std::isfinite(x) || !std::isfinite(p) || !std::isfinite(t_max))
    throw std::invalid_argument("trace_trajectory: non-finite input");
  const Layout l = layout_of(potential);
  const double m = units.mass;
  const double inf = std::numeric_limits<double>::infinity();
  Trajectory tr;
  std::size_t k = region_of(l, x, p);
  tr.energy = p * p / (2.0 * m) + l.heights[k];
  double t = 0.0;
  tr.legs.push_back({t, x, p});
  while (p != 0.0) {
    const double b = p > 0.0 ? (k < l.edges.size() ? l.edges[k] : inf) : (k > 0 ? l.edges[k - 1] : -inf);
    if (!std::isfinite(b)) break;
    const double t_b = t + (b - x) * m / p;
    if (t_b > t_max) break;
    const std::size_t next = p > 0.0 ? k + 1 : k - 1;
    const double kinetic = tr.energy - l.heights[next];
    t = t_b;
    x = b;
    if (kinetic > 0.0) {
      p = std::copysign(std::sqrt(2.0 * m * kinetic), p);
      k = next;
    } else {
      p = -p;
    }
    tr.legs.push_back({t, x, p});
  }
  tr.t_end = t_max;
  const auto& last = tr.legs.back();
  tr.x_end = last.x + last.p / m * (t_max - last.t);
  return tr;
}

std::vector<ArrivalEvent> trace_arrivals(const ClassicalEnsemble& ensemble,
                                         const PiecewisePotential& potential, double X,
                                         double t_max, const PhysicalUnits& units) {
  ensemble.validate();
  if (!std::isfinite(X) || !std::isfinite(t_max)) throw std::invalid_argument("trace_arrivals: non-finite X or t_max");
  std::vector<std::vector<ArrivalEvent>> per_sample(ensemble.samples.size());
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < ensemble.samples.size(); ++s) {
    const auto& smp = ensemble.samples[s];
    const auto tr = trace_trajectory(smp.x, smp.p, potential, t_max, units);
    for (std::size_t i = 0; i < tr.legs.size(); ++i) {
      const auto& leg = tr.legs[i];
      if (leg.p == 0.0) continue;
      const double t_stop = i + 1 < tr.legs.size() ? tr.legs[i + 1].t : t_max;
      const double t_cross = leg.t + (X - leg.x) * units.mass / leg.p;
      // A leg starting exactly on X counts only if it continues a crossing.
      const bool starts_on = leg.x == X;
      if (starts_on) {
        const bool continues = i > 0 && (tr.legs[i - 1].p > 0.0) == (leg.p > 0.0);
        if (!continues) continue;
      }
      if (t_cross > leg.t && t_cross < t_stop && t_cross <= t_max)
        per_sample[s].push_back({t_cross, leg.p > 0.0 ? Side::Left : Side::Right, smp.w});
      else if (starts_on && leg.t > 0.0)
        per_sample[s].push_back({leg.t, leg.p > 0.0 ? Side::Left : Side::Right, smp.w});
    }
  }
  std::vector<ArrivalEvent> events;
  for (auto& v : per_sample) events.insert(events.end(), v.begin(), v.end());
  return events;
}

DistributionSeries classical_distribution(std::span<const ArrivalEvent> events, double X,
                                          const TimeGrid& times, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  DistributionSeries s;
  s.X = X;
  s.times = times;
  s.left.assign(times.count(), 0.0);
  s.right.assign(times.count(), 0.0);
  s.total.assign(times.count(), 0.0);
  for (std::size_t n = 0; n < times.count(); ++n) {
    double l = 0.0, r = 0.0;
    for (const auto& e : events) {
      const double k = e.weight * kernel(times[n] - e.time, bandwidth);
      if (e.side == Side::Left)
        l += k;
      else
        r += k;
    }
    s.left[n] = l;
    s.right[n] = r;
    s.total[n] = l + r;
  }
  return s;
}

std::vector<double> classical_flux(std::span<const ArrivalEvent> events, const TimeGrid& times,
                                   double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  std::vector<double> j(times.count(), 0.0);
  for (std::size_t n = 0; n < times.count(); ++n)
    for (const auto& e : events) j[n] += alpha(e.side) * e.weight * kernel(times[n] - e.time, bandwidth);
  return j;
}

}  // namespace toa
