#include "toa/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace toa {

namespace {

constexpr cplx I{0.0, 1.0};

double max_abs(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

void check_amplitude(const AsymptoteAmplitude& phi) {
  phi.units.validate();
  if (phi.values.size() != phi.grid.size())
    throw std::invalid_argument("asymptote values do not match its grid");
}

// Quadrature coefficients w_p phi(p) exp(-i E_p (t - t_ref) / hbar).
std::vector<cplx> evolved_weights(const AsymptoteAmplitude& phi, double t) {
  const auto& nodes = phi.grid.nodes();
  const auto& w = phi.grid.weights();
  const double dt = t - phi.reference_time;
  std::vector<cplx> c(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    c[i] = w[i] * phi.values[i] * std::exp(-I * (phi.units.energy(nodes[i]) * dt / phi.units.hbar));
  return c;
}

}  // namespace

double AsymptoteAmplitude::norm_squared() const {
  std::vector<double> dens(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dens[i] = std::norm(values[i]);
  return integrate(std::span<const double>(dens), grid);
}

double AsymptoteAmplitude::mean_momentum() const {
  std::vector<double> dens(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dens[i] = grid.nodes()[i] * std::norm(values[i]);
  return integrate(std::span<const double>(dens), grid);
}

AsymptoteAmplitude AsymptoteAmplitude::time_shifted(double tau) const {
  AsymptoteAmplitude out = *this;
  out.reference_time += tau;
  return out;
}

AsymptoteAmplitude AsymptoteAmplitude::freely_evolved(double tau) const {
  AsymptoteAmplitude out = *this;
  for (std::size_t i = 0; i < values.size(); ++i)
    out.values[i] *= std::exp(-I * (units.energy(grid.nodes()[i]) * tau / units.hbar));
  return out;
}

void GaussianSpec::validate() const {
  if (!std::isfinite(x0) || !std::isfinite(p0)) throw std::invalid_argument("Gaussian mean must be finite");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw std::invalid_argument("Gaussian width dx must be positive");
}

double WaveField::norm_squared() const {
  if (weights.size() != values.size()) throw std::invalid_argument("field has no quadrature weights");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * std::norm(values[i]);
  return s;
}

MomentumWindow packet_window(const GaussianSpec& spec, const PhysicalUnits& units, double widths) {
  const double dp = spec.dp(units);
  return {spec.p0 - widths * dp, spec.p0 + widths * dp};
}

MomentumGrid packet_momentum_grid(const GaussianSpec& spec, const PiecewisePotential& potential,
                                  const PhaseBudget& budget, const PhysicalUnits& units) {
  spec.validate();
  auto win = packet_window(spec, units);
  if (win.lo < 0.0 && win.hi > 0.0) {
    // two-signed grids are kept symmetric so the outgoing asymptote lives on the same grid
    const double reach = std::max(-win.lo, win.hi);
    win = {-reach, reach};
  }
  return resolve_s_matrix(build_resolved_momentum_grid(win.lo, win.hi, budget, units), potential, units);
}

AsymptoteAmplitude gaussian_asymptote(const GaussianSpec& spec, const MomentumGrid& grid,
                                      const PhysicalUnits& units) {
  spec.validate();
  units.validate();
  const double dp = spec.dp(units);
  AsymptoteAmplitude phi;
  phi.grid = grid;
  phi.units = units;
  phi.reference_time = 0.0;
  const double pref = std::pow(2.0 * pi * dp * dp, -0.25);
  for (double p : grid.nodes()) {
    const double q = p - spec.p0;
    phi.values.push_back(pref * std::exp(-q * q / (4.0 * dp * dp)) *
                         std::exp(-I * (p * spec.x0 / units.hbar)));
  }
  const double deficit = std::abs(1.0 - phi.norm_squared());
  if (deficit > 1e-8) {
    std::ostringstream msg;
    msg << "momentum grid [" << grid.lo() << ", " << grid.hi()
        << "] does not cover the packet: norm deficit " << deficit;
    throw std::domain_error(msg.str());
  }
  return phi;
}

cplx free_gaussian(const GaussianSpec& spec, double x, double t, const PhysicalUnits& units) {
  const double hb = units.hbar, m = units.mass, dx = spec.dx;
  const cplx spread = 1.0 + I * (hb * t / (2.0 * m * dx * dx));
  const double b = x - spec.x0 - spec.p0 * t / m;
  const cplx arg = -b * b / (4.0 * dx * dx * spread) +
                   I * (spec.p0 * (x - spec.x0) / hb - spec.p0 * spec.p0 * t / (2.0 * m * hb));
  return std::pow(2.0 * pi * dx * dx, -0.25) / std::sqrt(spread) * std::exp(arg);
}

double negative_fraction(const GaussianSpec& spec, const PhysicalUnits& units) {
  spec.validate();
  return 0.5 * std::erfc(spec.p0 / (std::sqrt(2.0) * spec.dp(units)));
}

double negative_fraction(const AsymptoteAmplitude& phi) {
  check_amplitude(phi);
  double s = 0.0;
  for (std::size_t i = 0; i < phi.values.size(); ++i)
    if (phi.grid.nodes()[i] < 0.0) s += phi.grid.weights()[i] * std::norm(phi.values[i]);
  return s;
}

WaveField evolve_full(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                      double t, std::span<const double> positions) {
  check_amplitude(phi_in);
  if (!std::is_sorted(positions.begin(), positions.end()))
    throw std::invalid_argument("positions must be increasing");
  check_phase_resolution(phi_in.grid, t - phi_in.reference_time, max_abs(positions), phi_in.units);
  WaveField field;
  field.positions.assign(positions.begin(), positions.end());
  field.values.assign(positions.size(), cplx{});
  field.derivatives.assign(positions.size(), cplx{});
  field.instant = t;
  const auto c = evolved_weights(phi_in, t);
  const auto& nodes = phi_in.grid.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (c[i] == cplx{}) continue;
    const ScatteringState state(nodes[i], potential, phi_in.units);
    for (std::size_t j = 0; j < positions.size(); ++j) {
      const auto e = state(positions[j]);
      field.values[j] += c[i] * e.value;
      field.derivatives[j] += c[i] * e.derivative;
    }
  }
  return field;
}

WaveField evolve_full(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                      double t, const SpatialGrid& grid) {
  auto field = evolve_full(phi_in, potential, t, std::span<const double>(grid.nodes()));
  field.weights = grid.weights();
  return field;
}

WaveField evolve_free(const AsymptoteAmplitude& phi, double t, std::span<const double> positions) {
  check_amplitude(phi);
  if (!std::is_sorted(positions.begin(), positions.end()))
    throw std::invalid_argument("positions must be increasing");
  check_phase_resolution(phi.grid, t - phi.reference_time, max_abs(positions), phi.units);
  WaveField field;
  field.positions.assign(positions.begin(), positions.end());
  field.values.assign(positions.size(), cplx{});
  field.derivatives.assign(positions.size(), cplx{});
  field.instant = t;
  const auto c = evolved_weights(phi, t);
  const auto& nodes = phi.grid.nodes();
  const double hb = phi.units.hbar;
  const double norm = 1.0 / std::sqrt(2.0 * pi * hb);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double k = nodes[i] / hb;
    for (std::size_t j = 0; j < positions.size(); ++j) {
      const cplx v = c[i] * norm * std::exp(I * (k * positions[j]));
      field.values[j] += v;
      field.derivatives[j] += I * k * v;
    }
  }
  return field;
}

WaveField evolve_free(const AsymptoteAmplitude& phi, double t, const SpatialGrid& grid) {
  auto field = evolve_free(phi, t, std::span<const double>(grid.nodes()));
  field.weights = grid.weights();
  return field;
}

AsymptoteAmplitude momentum_representation(const WaveField& field, const MomentumGrid& grid,
                                           const PhysicalUnits& units, double truncation_tolerance) {
  units.validate();
  if (field.weights.size() != field.positions.size() || field.positions.empty())
    throw std::invalid_argument("momentum_representation needs a field on a quadrature grid");
  const double edge = std::max(std::abs(field.values.front()), std::abs(field.values.back()));
  if (edge > truncation_tolerance) {
    std::ostringstream msg;
    msg << "wave function at t = " << field.instant << " reaches the spatial grid ends (|psi| = "
        << edge << " > " << truncation_tolerance << ")";
    throw std::domain_error(msg.str());
  }
  AsymptoteAmplitude out;
  out.grid = grid;
  out.units = units;
  out.reference_time = field.instant;
  out.values.assign(grid.size(), cplx{});
  const double norm = 1.0 / std::sqrt(2.0 * pi * units.hbar);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = grid.nodes()[i] / units.hbar;
    cplx s{};
    for (std::size_t j = 0; j < field.positions.size(); ++j)
      s += field.weights[j] * std::exp(-I * (k * field.positions[j])) * field.values[j];
    out.values[i] = norm * s;
  }
  return out;
}

double flux(const WaveField& field, double X, const PhysicalUnits& units) {
  const auto& xs = field.positions;
  if (xs.empty() || X < xs.front() || X > xs.back())
    throw std::out_of_range("flux: X outside the field's positions");
  const auto it = std::lower_bound(xs.begin(), xs.end(), X);
  const auto j = static_cast<std::size_t>(it - xs.begin());
  cplx psi, dpsi;
  if (*it == X) {
    psi = field.values[j];
    dpsi = field.derivatives[j];
  } else {
    const std::size_t i = j - 1;
    const double h = xs[j] - xs[i];
    const double s = (X - xs[i]) / h;
    const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
    const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
    psi = h00 * field.values[i] + h10 * h * field.derivatives[i] + h01 * field.values[j] +
          h11 * h * field.derivatives[j];
    dpsi = (1.0 - s) * field.derivatives[i] + s * field.derivatives[j];
  }
  return units.hbar / units.mass * std::imag(std::conj(psi) * dpsi);
}

StationaryStateEval field_at(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                             double X, double t) {
  const double x[] = {X};
  const auto f = evolve_full(phi_in, potential, t, x);
  return {0.0, X, f.values[0], f.derivatives[0]};
}

AsymptoteAmplitude project_incoming(const GaussianSpec& initial, const PiecewisePotential& potential,
                                    const MomentumGrid& grid, const SpatialGrid& space,
                                    const PhysicalUnits& units) {
  initial.validate();
  units.validate();
  std::vector<cplx> psi0(space.size());
  for (std::size_t j = 0; j < space.size(); ++j)
    psi0[j] = space.weights()[j] * free_gaussian(initial, space.nodes()[j], 0.0, units);
  AsymptoteAmplitude out;
  out.grid = grid;
  out.units = units;
  out.reference_time = 0.0;
  out.values.reserve(grid.size());
  for (double p : grid.nodes()) {
    const ScatteringState state(p, potential, units);
    cplx s{};
    for (std::size_t j = 0; j < space.size(); ++j) s += std::conj(state(space.nodes()[j]).value) * psi0[j];
    out.values.push_back(s);
  }
  return out;
}

}  // namespace toa
