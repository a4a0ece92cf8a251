#include "toa/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toa {

PiecewisePotential::PiecewisePotential(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!std::isfinite(s.x_left) || !std::isfinite(s.x_right) || !std::isfinite(s.height))
      throw std::invalid_argument("potential segment has non-finite fields");
    if (!(s.x_left < s.x_right))
      throw std::invalid_argument("potential segment needs x_left < x_right");
    if (i > 0 && s.x_left < segments_[i - 1].x_right)
      throw std::invalid_argument("potential segments must be ordered and non-overlapping");
  }
}

PiecewisePotential PiecewisePotential::square_barrier(double height, double x_left, double x_right) {
  return PiecewisePotential({Segment{x_left, x_right, height}});
}

bool PiecewisePotential::is_free() const {
  return std::all_of(segments_.begin(), segments_.end(),
                     [](const Segment& s) { return s.height == 0.0; });
}

double PiecewisePotential::operator()(double x) const {
  for (const auto& s : segments_)
    if (x >= s.x_left && x < s.x_right) return s.height;
  return 0.0;
}

std::vector<double> PiecewisePotential::edges() const {
  std::vector<double> out;
  for (const auto& s : segments_) {
    out.push_back(s.x_left);
    out.push_back(s.x_right);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PiecewisePotential PiecewisePotential::mirrored() const {
  std::vector<Segment> out;
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it)
    out.push_back({-it->x_right, -it->x_left, it->height});
  return PiecewisePotential(std::move(out));
}

namespace {

constexpr cplx I{0.0, 1.0};

}  // namespace

ScatteringState::ScatteringState(double p, const PiecewisePotential& potential,
                                 const PhysicalUnits& units)
    : p_(p), mirrored_(p < 0.0) {
  units.validate();
  if (p == 0.0) throw std::domain_error("stationary state at p = 0 (threshold) is not defined");
  if (!std::isfinite(p)) throw std::invalid_argument("momentum must be finite");
  k_ = std::abs(p) / units.hbar;
  norm_ = 1.0 / std::sqrt(2.0 * pi * units.hbar);

  if (potential.is_free()) {
    t_ = 1.0;
    r_ = 0.0;
    return;
  }
  const auto frame = mirrored_ ? potential.mirrored() : potential;
  bounds_ = frame.edges();
  const std::size_t nreg = bounds_.size() - 1;
  regions_.resize(nreg);

  // Backward sweep from the right edge with the unnormalized transmitted
  // wave exp(ik(y - b_R)); (u, du) are value and derivative at the current
  // edge, expressed in units of exp(log_scale).
  cplx u = 1.0, du = I * k_;
  double log_scale = 0.0;
  const double two_m = 2.0 * units.mass / (units.hbar * units.hbar);
  for (std::size_t j = nreg; j-- > 0;) {
    auto& reg = regions_[j];
    reg.x0 = bounds_[j];
    reg.width = bounds_[j + 1] - bounds_[j];
    const double height = frame(0.5 * (bounds_[j] + bounds_[j + 1]));
    const double q2 = k_ * k_ - two_m * height;
    const double L = reg.width;
    if (std::abs(q2) * L * L <= 1.0) {
      // cos/sin (or cosh/sinh) basis, uniform through q^2 = 0
      reg.kind = Kind::Threshold;
      reg.k = q2;
      double C, S;
      if (q2 > 0.0) {
        const double q = std::sqrt(q2);
        C = std::cos(q * L);
        S = std::sin(q * L) / q;
      } else if (q2 < 0.0) {
        const double kap = std::sqrt(-q2);
        C = std::cosh(kap * L);
        S = std::sinh(kap * L) / kap;
      } else {
        C = 1.0;
        S = L;
      }
      reg.a = C * u - S * du;
      reg.b = q2 * S * u + C * du;
      reg.log_scale = log_scale;
      u = reg.a;
      du = reg.b;
    } else if (q2 > 0.0) {
      const double q = std::sqrt(q2);
      reg.kind = Kind::Oscillatory;
      reg.k = q;
      const cplx ratio = du / (I * q);
      reg.a = 0.5 * (u + ratio) * std::exp(-I * (q * L));
      reg.b = 0.5 * (u - ratio) * std::exp(I * (q * L));
      reg.log_scale = log_scale;
      u = reg.a + reg.b;
      du = I * q * (reg.a - reg.b);
    } else {
      // a exp(-kap s) + b exp(-kap (L - s)); the growing factor exp(kap L)
      // is folded into the log scale.
      const double kap = std::sqrt(-q2);
      reg.kind = Kind::Evanescent;
      reg.k = kap;
      const double decay = std::exp(-kap * L);
      const cplx alpha = 0.5 * (u - du / kap);
      const cplx beta = 0.5 * (u + du / kap);
      log_scale += kap * L;
      reg.a = alpha;
      reg.b = beta * decay;
      reg.log_scale = log_scale;
      u = reg.a + reg.b * decay;
      du = -kap * reg.a + kap * reg.b * decay;
    }
    const double mag = std::max(std::abs(u), std::abs(du) / k_);
    if (mag > 1e100 || (mag > 0.0 && mag < 1e-100)) {
      u /= mag;
      du /= mag;
      log_scale += std::log(mag);
    }
  }

  const double b1 = bounds_.front(), bR = bounds_.back();
  const cplx ratio = du / (I * k_);
  const cplx A = 0.5 * (u + ratio);
  const cplx B = 0.5 * (u - ratio);
  r_ = (B / A) * std::exp(2.0 * I * (k_ * b1));
  t_ = std::exp(-log_scale) * std::exp(I * (k_ * (b1 - bR))) / A;

  const cplx overall = norm_ * std::exp(I * (k_ * b1)) / A;
  for (auto& reg : regions_) {
    const cplx c = overall * std::exp(reg.log_scale - log_scale);
    reg.a *= c;
    reg.b *= c;
  }
  right_out_ = overall * std::exp(-log_scale);
  left_in_ = norm_;
  left_out_ = norm_ * r_;
}

StationaryStateEval ScatteringState::evaluate_left_incidence(double y) const {
  StationaryStateEval out;
  if (bounds_.empty()) {
    out.value = norm_ * std::exp(I * (k_ * y));
    out.derivative = I * k_ * out.value;
    return out;
  }
  if (y < bounds_.front()) {
    const cplx fwd = left_in_ * std::exp(I * (k_ * y));
    const cplx bwd = left_out_ * std::exp(-I * (k_ * y));
    out.value = fwd + bwd;
    out.derivative = I * k_ * (fwd - bwd);
    return out;
  }
  if (y >= bounds_.back()) {
    out.value = right_out_ * std::exp(I * (k_ * (y - bounds_.back())));
    out.derivative = I * k_ * out.value;
    return out;
  }
  const auto it = std::upper_bound(bounds_.begin(), bounds_.end(), y);
  const auto& reg = regions_[static_cast<std::size_t>(it - bounds_.begin()) - 1];
  const double s = y - reg.x0;
  switch (reg.kind) {
    case Kind::Oscillatory: {
      const cplx e = std::exp(I * (reg.k * s));
      const cplx fwd = reg.a * e, bwd = reg.b / e;
      out.value = fwd + bwd;
      out.derivative = I * reg.k * (fwd - bwd);
      break;
    }
    case Kind::Evanescent: {
      const double d1 = std::exp(-reg.k * s);
      const double d2 = std::exp(-reg.k * (reg.width - s));
      out.value = reg.a * d1 + reg.b * d2;
      out.derivative = reg.k * (reg.b * d2 - reg.a * d1);
      break;
    }
    case Kind::Threshold: {
      const double q2 = reg.k;
      double C, S;
      if (q2 > 0.0) {
        const double q = std::sqrt(q2);
        C = std::cos(q * s);
        S = std::sin(q * s) / q;
      } else if (q2 < 0.0) {
        const double kap = std::sqrt(-q2);
        C = std::cosh(kap * s);
        S = std::sinh(kap * s) / kap;
      } else {
        C = 1.0;
        S = s;
      }
      out.value = reg.a * C + reg.b * S;
      out.derivative = -q2 * S * reg.a + C * reg.b;
      break;
    }
  }
  return out;
}

StationaryStateEval ScatteringState::operator()(double x) const {
  if (!std::isfinite(x)) throw std::invalid_argument("position must be finite");
  StationaryStateEval out;
  if (mirrored_) {
    out = evaluate_left_incidence(-x);
    out.derivative = -out.derivative;
  } else {
    out = evaluate_left_incidence(x);
  }
  out.p = p_;
  out.x = x;
  return out;
}

StationaryStateEval stationary_state_plus(double p, const PiecewisePotential& potential, double x,
                                          const PhysicalUnits& units) {
  return ScatteringState(p, potential, units)(x);
}

StationaryStateEval stationary_state_minus(double p, const PiecewisePotential& potential, double x,
                                           const PhysicalUnits& units) {
  auto out = ScatteringState(-p, potential, units)(x);
  out.p = p;
  out.value = std::conj(out.value);
  out.derivative = std::conj(out.derivative);
  return out;
}

SMatrixEntry s_matrix(double p, const PiecewisePotential& potential, const PhysicalUnits& units) {
  if (!(p > 0.0)) throw std::domain_error("s_matrix requires p > 0");
  const ScatteringState from_left(p, potential, units);
  const ScatteringState from_right(-p, potential, units);
  return {p, from_left.transmission(), from_left.reflection(), from_right.reflection()};
}

namespace {

bool mirror_symmetric_nodes(const MomentumGrid& grid) {
  const auto& n = grid.nodes();
  const std::size_t size = n.size();
  for (std::size_t i = 0; i < size; ++i) {
    const double scale = std::max(1.0, std::abs(n[i]));
    if (std::abs(n[i] + n[size - 1 - i]) > 1e-12 * scale) return false;
    if (std::abs(grid.weights()[i] - grid.weights()[size - 1 - i]) > 1e-12 * scale) return false;
  }
  return true;
}

}  // namespace

MomentumGrid mirror_symmetric(const MomentumGrid& grid) {
  if (grid.empty()) throw std::invalid_argument("mirror_symmetric: empty grid");
  if (!grid.split_at_zero())
    throw std::invalid_argument("two-signed momentum grid must be split at p = 0");
  if (grid.has_negative() && grid.has_positive()) {
    if (!mirror_symmetric_nodes(grid))
      throw std::invalid_argument("two-signed momentum grid must be symmetric under p -> -p");
    return grid;
  }
  std::vector<PanelSpec> panels;
  for (auto it = grid.panels().rbegin(); it != grid.panels().rend(); ++it)
    panels.push_back({-it->hi, -it->lo, it->count});
  for (const auto& pn : grid.panels()) panels.push_back({pn.lo, pn.hi, pn.count});
  std::sort(panels.begin(), panels.end(),
            [](const PanelSpec& a, const PanelSpec& b) { return a.lo < b.lo; });
  return MomentumGrid::from_panels(panels);
}

AsymptoteAmplitude outgoing_asymptote(const AsymptoteAmplitude& phi_in,
                                      const PiecewisePotential& potential) {
  if (phi_in.values.size() != phi_in.grid.size())
    throw std::invalid_argument("outgoing_asymptote: values do not match grid");
  AsymptoteAmplitude out;
  out.grid = mirror_symmetric(phi_in.grid);
  out.reference_time = phi_in.reference_time;
  out.units = phi_in.units;
  const std::size_t n = out.grid.size();
  // phi_in extended to the symmetric grid, zero on the added mirror half
  std::vector<cplx> ext(n, cplx{});
  if (n == phi_in.grid.size()) {
    ext = phi_in.values;
  } else if (phi_in.grid.has_positive()) {
    std::copy(phi_in.values.begin(), phi_in.values.end(), ext.begin() + static_cast<std::ptrdiff_t>(n / 2));
  } else {
    std::copy(phi_in.values.begin(), phi_in.values.end(), ext.begin());
  }
  out.values.assign(n, cplx{});
  const auto& nodes = out.grid.nodes();
  for (std::size_t i = n / 2; i < n; ++i) {
    const std::size_t j = n - 1 - i;  // mirror node, nodes[j] == -nodes[i]
    const auto s = s_matrix(nodes[i], potential, phi_in.units);
    out.values[i] = s.t * ext[i] + s.r_right * ext[j];
    out.values[j] = s.t * ext[j] + s.r_left * ext[i];
  }
  return out;
}

}  // namespace toa

namespace toa {

namespace {

std::pair<cplx, cplx> panel_integral(double lo, double hi, std::size_t count,
                                     const PiecewisePotential& potential, const PhysicalUnits& units) {
  const auto rule = gauss_legendre(count);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  cplx it{}, ir{};
  for (std::size_t k = 0; k < count; ++k) {
    const ScatteringState s(std::abs(mid + half * rule.nodes[k]), potential, units);
    it += half * rule.weights[k] * s.transmission();
    ir += half * rule.weights[k] * s.reflection();
  }
  return {it, ir};
}

void refine_panel(double lo, double hi, std::size_t count, const PiecewisePotential& potential,
                  const PhysicalUnits& units, double tolerance, int depth, std::vector<PanelSpec>& out) {
  const double mid = 0.5 * (lo + hi);
  const auto whole = panel_integral(lo, hi, count, potential, units);
  const auto a = panel_integral(lo, mid, count, potential, units);
  const auto b = panel_integral(mid, hi, count, potential, units);
  const double err = std::max(std::abs(whole.first - a.first - b.first),
                              std::abs(whole.second - a.second - b.second));
  if (err <= tolerance * (hi - lo) || depth >= 40) {
    out.push_back({lo, hi, count});
    return;
  }
  refine_panel(lo, mid, count, potential, units, tolerance, depth + 1, out);
  refine_panel(mid, hi, count, potential, units, tolerance, depth + 1, out);
}

}  // namespace

MomentumGrid resolve_s_matrix(const MomentumGrid& grid, const PiecewisePotential& potential,
                              const PhysicalUnits& units, double tolerance) {
  units.validate();
  if (!(tolerance > 0.0)) throw std::invalid_argument("resolve_s_matrix: tolerance must be positive");
  if (potential.is_free()) return grid;
  std::vector<PanelSpec> panels;
  for (const auto& pn : grid.panels())
    refine_panel(pn.lo, pn.hi, pn.count, potential, units, tolerance, 0, panels);
  return MomentumGrid::from_panels(panels);
}

}  // namespace toa
