#include "toa/arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace toa {

namespace {

constexpr cplx I{0.0, 1.0};

DistributionSeries empty_series(CrossingKind kind, double X, const TimeGrid& times) {
  DistributionSeries s;
  s.kind = kind;
  s.X = X;
  s.times = times;
  s.left.assign(times.count(), 0.0);
  s.right.assign(times.count(), 0.0);
  s.total.assign(times.count(), 0.0);
  return s;
}

void finish(DistributionSeries& s) {
  for (std::size_t i = 0; i < s.total.size(); ++i) s.total[i] = s.left[i] + s.right[i];
}

void require_split(const MomentumGrid& grid) {
  if (grid.has_negative() && grid.has_positive() && !grid.split_at_zero())
    throw std::invalid_argument("momentum grid with both signs must be split at p = 0");
}

// exp(-i E_p (T - t_ref) / hbar) for every node and time.
std::vector<cplx> time_phases(const AsymptoteAmplitude& phi, double T) {
  std::vector<cplx> out(phi.grid.size());
  const double dt = T - phi.reference_time;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::exp(-I * (phi.units.energy(phi.grid.nodes()[i]) * dt / phi.units.hbar));
  return out;
}

std::vector<StationaryStateEval> states_at(const MomentumGrid& grid, const PiecewisePotential& potential,
                                           double X, const PhysicalUnits& units) {
  std::vector<StationaryStateEval> out;
  out.reserve(grid.size());
  for (double p : grid.nodes()) out.push_back(ScatteringState(p, potential, units)(X));
  return out;
}

// Pi_3 from <p_±|psi(T)> = phi(p) e^{-iE_p T} and conj(psi_p^±(X)).
DistributionSeries pi3_from(const AsymptoteAmplitude& phi, std::span<const cplx> conj_state_at_X,
                            CrossingKind kind, double X, const TimeGrid& times) {
  require_split(phi.grid);
  auto s = empty_series(kind, X, times);
  const auto& nodes = phi.grid.nodes();
  const auto& w = phi.grid.weights();
  std::vector<cplx> base(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    base[i] = w[i] * std::sqrt(std::abs(nodes[i]) / phi.units.mass) * std::conj(phi.values[i]) *
              conj_state_at_X[i];
  for (std::size_t n = 0; n < times.count(); ++n) {
    const auto ph = time_phases(phi, times[n]);
    cplx aL{}, aR{};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const cplx term = base[i] * std::conj(ph[i]);
      if (nodes[i] > 0.0)
        aL += term;
      else
        aR += term;
    }
    s.left[n] = std::norm(aL);
    s.right[n] = std::norm(aR);
  }
  finish(s);
  return s;
}

FluxSeries flux_from(const AsymptoteAmplitude& phi, std::span<const StationaryStateEval> states,
                     double X, const TimeGrid& times) {
  FluxSeries f{X, times, std::vector<double>(times.count(), 0.0)};
  const auto& w = phi.grid.weights();
  for (std::size_t n = 0; n < times.count(); ++n) {
    const auto ph = time_phases(phi, times[n]);
    cplx psi{}, dpsi{};
    for (std::size_t i = 0; i < states.size(); ++i) {
      const cplx c = w[i] * phi.values[i] * ph[i];
      psi += c * states[i].value;
      dpsi += c * states[i].derivative;
    }
    f.values[n] = phi.units.hbar / phi.units.mass * std::imag(std::conj(psi) * dpsi);
  }
  return f;
}

double max_abs_distance(double X, const SpatialGrid& space) {
  return std::max(std::abs(X - space.lo()), std::abs(X - space.hi()));
}

}  // namespace

std::string_view to_string(CrossingKind kind) {
  switch (kind) {
    case CrossingKind::KijowskiFree: return "kijowski-free";
    case CrossingKind::Proposal1: return "pi1";
    case CrossingKind::Proposal2Plus: return "pi2+";
    case CrossingKind::Proposal2Minus: return "pi2-";
    case CrossingKind::Proposal3Plus: return "pi3+";
    case CrossingKind::Proposal3Minus: return "pi3-";
  }
  return "?";
}

CrossingKind parse_kind(std::string_view tag) {
  for (auto k : {CrossingKind::KijowskiFree, CrossingKind::Proposal1, CrossingKind::Proposal2Plus,
                 CrossingKind::Proposal2Minus, CrossingKind::Proposal3Plus, CrossingKind::Proposal3Minus})
    if (to_string(k) == tag) return k;
  throw std::invalid_argument("unknown distribution kind '" + std::string(tag) + "'");
}

bool needs_scattering_context(CrossingKind kind) {
  return kind != CrossingKind::KijowskiFree && kind != CrossingKind::Proposal1;
}

Peak find_peak(std::span<const double> values, const TimeGrid& times) {
  if (values.size() != times.count()) throw std::invalid_argument("find_peak: length mismatch");
  const auto it = std::max_element(values.begin(), values.end());
  Peak pk;
  pk.index = static_cast<std::size_t>(it - values.begin());
  pk.time = times[pk.index];
  pk.height = *it;
  if (pk.index == 0 || pk.index + 1 == values.size()) return pk;
  const double ym = values[pk.index - 1], y0 = values[pk.index], yp = values[pk.index + 1];
  const double denom = ym - 2.0 * y0 + yp;
  if (denom >= 0.0) return pk;
  const double delta = 0.5 * (ym - yp) / denom;
  pk.time += delta * times.step();
  pk.height = y0 - 0.25 * (ym - yp) * delta;
  return pk;
}

cplx kijowski_overlap(const AsymptoteAmplitude& phi, Side side, double X, double T) {
  phi.units.validate();
  require_split(phi.grid);
  if (phi.values.size() != phi.grid.size()) throw std::invalid_argument("asymptote values do not match grid");
  const int a = alpha(side);
  const double hb = phi.units.hbar;
  const double norm = 1.0 / std::sqrt(2.0 * pi * hb);
  const double dt = T - phi.reference_time;
  cplx sum{};
  for (std::size_t i = 0; i < phi.grid.size(); ++i) {
    const double p = phi.grid.nodes()[i];
    if (a * p <= 0.0) continue;
    const double phase = (p * X - phi.units.energy(p) * dt) / hb;
    sum += phi.grid.weights()[i] * std::sqrt(std::abs(p) / phi.units.mass) * phi.values[i] *
           std::exp(I * phase);
  }
  return norm * sum;
}

DistributionSeries kijowski(const AsymptoteAmplitude& phi, double X, const TimeGrid& times) {
  phi.units.validate();
  require_split(phi.grid);
  auto s = empty_series(CrossingKind::KijowskiFree, X, times);
  const auto& nodes = phi.grid.nodes();
  const double hb = phi.units.hbar;
  const double norm = 1.0 / std::sqrt(2.0 * pi * hb);
  std::vector<cplx> base(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    base[i] = norm * phi.grid.weights()[i] * std::sqrt(std::abs(nodes[i]) / phi.units.mass) *
              phi.values[i] * std::exp(I * (nodes[i] * X / hb));
  for (std::size_t n = 0; n < times.count(); ++n) {
    const auto ph = time_phases(phi, times[n]);
    cplx aL{}, aR{};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i] > 0.0)
        aL += base[i] * ph[i];
      else if (nodes[i] < 0.0)
        aR += base[i] * ph[i];
    }
    s.left[n] = std::norm(aL);
    s.right[n] = std::norm(aR);
  }
  finish(s);
  return s;
}

Pi1Numerics make_pi1_numerics(SpatialGrid space, double cutoff, std::span<const double> arrival_points,
                              const PhysicalUnits& units, double truncation_tolerance) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("Pi1 momentum cutoff must be positive");
  if (!(truncation_tolerance > 0.0)) throw std::invalid_argument("truncation tolerance must be positive");
  if (space.empty()) throw std::invalid_argument("Pi1 needs a spatial grid");
  double reach = 0.0;
  for (double X : arrival_points) reach = std::max(reach, max_abs_distance(X, space));
  if (arrival_points.empty()) reach = space.hi() - space.lo();
  PhaseBudget budget;
  budget.x_reach = reach;
  auto transform = build_resolved_momentum_grid(-cutoff, cutoff, budget, units);
  return {std::move(space), std::move(transform), truncation_tolerance};
}

std::pair<double, double> packet_extent(const GaussianSpec& spec, double t_max,
                                        std::span<const double> must_contain,
                                        const PhysicalUnits& units) {
  spec.validate();
  // |psi| < 1e-8 needs about 8.6 standard deviations in either variable.
  const double reach_p = std::abs(spec.p0) + 9.0 * spec.dp(units);
  const double travel = reach_p * std::abs(t_max) / units.mass;
  double lo = spec.x0 - 9.0 * spec.dx - travel;
  double hi = spec.x0 + 9.0 * spec.dx + travel;
  for (double x : must_contain) {
    lo = std::min(lo, x - 1.0);
    hi = std::max(hi, x + 1.0);
  }
  return {lo, hi};
}

DistributionSeries pi1(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                       double X, const TimeGrid& times, const Pi1Numerics& numerics) {
  phi_in.units.validate();
  const auto& units = phi_in.units;
  const auto& space = numerics.space;
  const auto& transform = numerics.transform;
  if (!transform.split_at_zero()) throw std::invalid_argument("Pi1 transform grid must be split at p = 0");
  if (X < space.lo() || X > space.hi()) throw std::domain_error("Pi1: X outside the spatial grid");
  const double t_reach = std::max(std::abs(times.t_min() - phi_in.reference_time),
                                  std::abs(times.t_max() - phi_in.reference_time));
  const double x_reach = std::max(std::abs(space.lo()), std::abs(space.hi()));
  check_phase_resolution(phi_in.grid, t_reach, x_reach, units);
  check_phase_resolution(transform, 0.0, max_abs_distance(X, space), units);

  const std::size_t nx = space.size(), nk = transform.size(), np = phi_in.grid.size();
  const double hb = units.hbar;
  const double norm2 = 1.0 / (2.0 * pi * hb);

  // c_j^beta = u_j N^2 sum_k v_k Theta(alpha p_k) (|p_k|/m)^{1/2} e^{i p_k (X - x_j)}
  std::vector<double> root(nk);
  for (std::size_t k = 0; k < nk; ++k)
    root[k] = transform.weights()[k] * std::sqrt(std::abs(transform.nodes()[k]) / units.mass);
  std::vector<cplx> cL(nx), cR(nx);
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < nx; ++j) {
    const double y = (X - space.nodes()[j]) / hb;
    cplx sL{}, sR{};
    for (std::size_t k = 0; k < nk; ++k) {
      const double p = transform.nodes()[k];
      const cplx term = root[k] * std::polar(1.0, p * y);
      if (p > 0.0)
        sL += term;
      else
        sR += term;
    }
    cL[j] = space.weights()[j] * norm2 * sL;
    cR[j] = space.weights()[j] * norm2 * sR;
  }

  // K_i^beta = sum_j c_j^beta psi_{p_i}^+(x_j), plus psi_{p_i}^+ at the grid ends.
  std::vector<cplx> kL(np), kR(np), end_lo(np), end_hi(np);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < np; ++i) {
    const ScatteringState state(phi_in.grid.nodes()[i], potential, units);
    cplx sL{}, sR{};
    for (std::size_t j = 0; j < nx; ++j) {
      const cplx v = state(space.nodes()[j]).value;
      sL += cL[j] * v;
      sR += cR[j] * v;
    }
    kL[i] = sL;
    kR[i] = sR;
    end_lo[i] = state(space.lo()).value;
    end_hi[i] = state(space.hi()).value;
  }

  auto s = empty_series(CrossingKind::Proposal1, X, times);
  const auto& w = phi_in.grid.weights();
  for (std::size_t n = 0; n < times.count(); ++n) {
    const auto ph = time_phases(phi_in, times[n]);
    cplx aL{}, aR{}, lo{}, hi{};
    for (std::size_t i = 0; i < np; ++i) {
      const cplx d = w[i] * phi_in.values[i] * ph[i];
      aL += kL[i] * d;
      aR += kR[i] * d;
      lo += end_lo[i] * d;
      hi += end_hi[i] * d;
    }
    const double edge = std::max(std::abs(lo), std::abs(hi));
    if (edge > numerics.truncation_tolerance) {
      std::ostringstream msg;
      msg << "Pi1 at T = " << times[n] << ": wave function reaches the spatial grid ends [" << space.lo()
          << ", " << space.hi() << "] (|psi| = " << edge << " > " << numerics.truncation_tolerance
          << "; widen the grid or raise the truncation tolerance)";
      throw std::domain_error(msg.str());
    }
    s.left[n] = std::norm(aL);
    s.right[n] = std::norm(aR);
  }
  finish(s);
  return s;
}

std::pair<double, double> pi1_by_field(const AsymptoteAmplitude& phi_in,
                                       const PiecewisePotential& potential, double X, double T,
                                       const Pi1Numerics& numerics) {
  const auto field = evolve_full(phi_in, potential, T, numerics.space);
  const auto mom = momentum_representation(field, numerics.transform, phi_in.units, numerics.truncation_tolerance);
  return {std::norm(kijowski_overlap(mom, Side::Left, X, T)),
          std::norm(kijowski_overlap(mom, Side::Right, X, T))};
}

DistributionSeries pi2(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                       Branch branch, double X, const TimeGrid& times) {
  if (branch == Branch::Plus) {
    auto s = kijowski(phi_in, X, times);
    s.kind = CrossingKind::Proposal2Plus;
    return s;
  }
  auto s = kijowski(outgoing_asymptote(phi_in, potential), X, times);
  s.kind = CrossingKind::Proposal2Minus;
  return s;
}

DistributionSeries pi3(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                       Branch branch, double X, const TimeGrid& times) {
  phi_in.units.validate();
  if (branch == Branch::Plus) {
    const auto states = states_at(phi_in.grid, potential, X, phi_in.units);
    std::vector<cplx> c(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) c[i] = std::conj(states[i].value);
    return pi3_from(phi_in, c, CrossingKind::Proposal3Plus, X, times);
  }
  const auto phi_out = outgoing_asymptote(phi_in, potential);
  // conj(psi_p^-(X)) = psi_{-p}^+(X)
  std::vector<cplx> c;
  c.reserve(phi_out.grid.size());
  for (double p : phi_out.grid.nodes()) c.push_back(ScatteringState(-p, potential, phi_in.units)(X).value);
  return pi3_from(phi_out, c, CrossingKind::Proposal3Minus, X, times);
}

FluxSeries flux_series(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                       double X, const TimeGrid& times) {
  phi_in.units.validate();
  const auto states = states_at(phi_in.grid, potential, X, phi_in.units);
  return flux_from(phi_in, states, X, times);
}

const DistributionSeries& Bundle::at(CrossingKind kind) const {
  for (const auto& s : series)
    if (s.kind == kind) return s;
  throw std::out_of_range("bundle has no series of kind " + std::string(to_string(kind)));
}

Bundle series_bundle(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                     double X, const TimeGrid& times, const BundleRequest& request,
                     const Pi1Numerics* pi1_numerics) {
  phi_in.units.validate();
  Bundle bundle;
  std::optional<std::vector<StationaryStateEval>> plus_states;
  std::optional<AsymptoteAmplitude> phi_out;
  auto states = [&]() -> const std::vector<StationaryStateEval>& {
    if (!plus_states) plus_states = states_at(phi_in.grid, potential, X, phi_in.units);
    return *plus_states;
  };
  auto outgoing = [&]() -> const AsymptoteAmplitude& {
    if (!phi_out) phi_out = outgoing_asymptote(phi_in, potential);
    return *phi_out;
  };
  for (auto kind : request.kinds) {
    switch (kind) {
      case CrossingKind::KijowskiFree:
        bundle.series.push_back(kijowski(phi_in, X, times));
        break;
      case CrossingKind::Proposal1:
        if (pi1_numerics == nullptr) throw std::invalid_argument("pi1 requested without Pi1 numerics");
        bundle.series.push_back(pi1(phi_in, potential, X, times, *pi1_numerics));
        break;
      case CrossingKind::Proposal2Plus: {
        auto s = kijowski(phi_in, X, times);
        s.kind = kind;
        bundle.series.push_back(std::move(s));
        break;
      }
      case CrossingKind::Proposal2Minus: {
        auto s = kijowski(outgoing(), X, times);
        s.kind = kind;
        bundle.series.push_back(std::move(s));
        break;
      }
      case CrossingKind::Proposal3Plus: {
        const auto& st = states();
        std::vector<cplx> c(st.size());
        for (std::size_t i = 0; i < st.size(); ++i) c[i] = std::conj(st[i].value);
        bundle.series.push_back(pi3_from(phi_in, c, kind, X, times));
        break;
      }
      case CrossingKind::Proposal3Minus:
        bundle.series.push_back(pi3(phi_in, potential, Branch::Minus, X, times));
        break;
    }
  }
  if (request.with_flux) bundle.flux = flux_from(phi_in, states(), X, times);
  return bundle;
}

}  // namespace toa
