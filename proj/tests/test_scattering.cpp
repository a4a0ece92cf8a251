#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "toa/scattering.hpp"

using namespace toa;

namespace {

constexpr cplx I{0.0, 1.0};

// Plain (unscaled) 2x2 transfer matrices on A e^{ikx} + B e^{-ikx}, used as an
// independent reference for moderate potentials.
struct Reference {
  cplx t, r_left, r_right;
};

cplx local_k(double p, double v, const PhysicalUnits& u) {
  return std::sqrt(cplx(p * p - 2.0 * u.mass * v, 0.0)) / u.hbar;
}

// Coefficients (A, B) on the far side after crossing all edges in `order`.
std::array<cplx, 2> sweep(const std::vector<std::pair<double, double>>& layers, std::array<cplx, 2> ab,
                          double p, const PhysicalUnits& u) {
  // layers: (edge position, potential beyond the edge) in sweep order, starting
  // in a region of potential 0
  cplx k = cplx(std::abs(p) / u.hbar, 0.0);
  for (const auto& [x, v] : layers) {
    const cplx kn = local_k(p, v, u);
    const cplx e = std::exp(I * k * x), en = std::exp(I * kn * x);
    const cplx psi = ab[0] * e + ab[1] / e;
    const cplx dpsi = I * k * (ab[0] * e - ab[1] / e);
    ab = {(psi + dpsi / (I * kn)) / (2.0 * en), (psi - dpsi / (I * kn)) * en / 2.0};
    k = kn;
  }
  return ab;
}

Reference reference_s_matrix(double p, const PiecewisePotential& pot, const PhysicalUnits& u) {
  // Layer list from right to left: crossing leftwards from the right free region.
  const auto edges = pot.edges();
  std::vector<std::pair<double, double>> leftward, rightward;
  for (auto it = edges.rbegin(); it != edges.rend(); ++it) leftward.push_back({*it, pot(*it - 1e-12 * std::max(1.0, std::abs(*it)) - 1e-13)});
  for (double e : edges) rightward.push_back({e, pot(e + 1e-12 * std::max(1.0, std::abs(e)) + 1e-13)});
  Reference ref;
  // left incidence: right side is (1, 0); sweep to the left side
  const auto left = sweep(leftward, {1.0, 0.0}, p, u);
  ref.t = 1.0 / left[0];
  ref.r_left = left[1] / left[0];
  // right incidence: left side is (0, 1) in e^{-ipx}; sweep to the right side
  const auto right = sweep(rightward, {0.0, 1.0}, p, u);
  ref.r_right = right[0] / right[1];
  return ref;
}

PiecewisePotential random_potential(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_real_distribution<double> start(-5.0, 5.0), width(0.2, 3.0), gap(0.0, 2.0), height(-8.0, 15.0);
  std::vector<Segment> segs;
  double x = start(rng);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const double w = width(rng);
    segs.push_back({x, x + w, height(rng)});
    x += w + (i % 2 == 0 ? gap(rng) : 0.0);
  }
  return PiecewisePotential(segs);
}

double barrier_transmission(double p, double v0, double L) {
  const double e = 0.5 * p * p;
  if (e > v0) {
    const double k = std::sqrt(2.0 * (e - v0));
    return 1.0 / (1.0 + v0 * v0 * std::pow(std::sin(k * L), 2) / (4.0 * e * (e - v0)));
  }
  const double kappa = std::sqrt(2.0 * (v0 - e));
  return 1.0 / (1.0 + v0 * v0 * std::pow(std::sinh(kappa * L), 2) / (4.0 * e * (v0 - e)));
}

// Stationary Schrodinger equation psi'' = 2m(V - E)/hbar^2 psi as a real
// first-order system (Re psi, Im psi, Re psi', Im psi').
using OdeState = std::array<double, 4>;

OdeState integrate_stationary(OdeState y, double from, double to, double p, const PiecewisePotential& pot,
                              const PhysicalUnits& u) {
  namespace ode = boost::numeric::odeint;
  std::vector<double> stops{from};
  for (double e : pot.edges())
    if ((e - from) * (e - to) < 0.0) stops.push_back(e);
  stops.push_back(to);
  if (to < from) std::sort(stops.begin() + 1, stops.end() - 1, std::greater<>());
  else std::sort(stops.begin() + 1, stops.end() - 1);
  auto stepper = ode::make_controlled(1e-300, 1e-12, ode::runge_kutta_dopri5<OdeState>());
  for (std::size_t s = 0; s + 1 < stops.size(); ++s) {
    const double v = pot(0.5 * (stops[s] + stops[s + 1]));
    const double c = 2.0 * u.mass * (v - 0.5 * p * p / u.mass) / (u.hbar * u.hbar);
    auto rhs = [c](const OdeState& q, OdeState& dq, double) {
      dq = {q[2], q[3], c * q[0], c * q[1]};
    };
    const double dt = stops[s + 1] > stops[s] ? 1e-3 : -1e-3;
    ode::integrate_adaptive(stepper, rhs, y, stops[s], stops[s + 1], dt);
  }
  return y;
}

}  // namespace

TEST_CASE("free potential gives plane waves") {
  const PiecewisePotential free;
  const auto e = stationary_state_plus(6.0, free, 1.0);
  const cplx expected = std::exp(6.0 * I) / std::sqrt(2.0 * pi);
  CHECK(std::abs(e.value - expected) < 1e-15);
  CHECK(std::abs(e.derivative - 6.0 * I * expected) < 1e-14);
  const auto s = s_matrix(3.0, free);
  CHECK(s.t == cplx(1.0, 0.0));
  CHECK(s.r_left == cplx(0.0, 0.0));
  CHECK(s.r_right == cplx(0.0, 0.0));

  // zero-height segments are the free case too
  const PiecewisePotential flat({{0.0, 1.0, 0.0}, {2.0, 3.0, 0.0}});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pd(-20.0, 20.0), xd(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double p = pd(rng), x = xd(rng);
    const auto v = stationary_state_plus(p, flat, x);
    const cplx w = std::exp(I * p * x) / std::sqrt(2.0 * pi);
    CHECK(std::abs(v.value - w) < 1e-14);
    CHECK(std::abs(v.derivative - I * p * w) < 1e-13 * std::max(1.0, std::abs(p)));
  }
}

TEST_CASE("plane waves scale with hbar") {
  const PhysicalUnits u{0.5, 2.0};
  const auto e = stationary_state_plus(3.0, PiecewisePotential{}, 0.7, u);
  const cplx expected = std::exp(I * 3.0 * 0.7 / 0.5) / std::sqrt(2.0 * pi * 0.5);
  CHECK(std::abs(e.value - expected) < 1e-15);
}

TEST_CASE("square barrier at p = 6 matches the closed form") {
  const auto pot = fixture::barrier();
  const auto s = s_matrix(6.0, pot);
  const double expected = barrier_transmission(6.0, 10.0, 10.0);
  CHECK(std::norm(s.t) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::norm(s.t) == doctest::Approx(0.912).epsilon(1e-3));
  CHECK(std::norm(s.t) + std::norm(s.r_left) == doctest::Approx(1.0).epsilon(1e-12));

  // interior wavenumber 4: psi(x + pi/4)... carries exp(+-4ix); check psi'' = -16 psi inside
  const double h = 1e-4;
  const double x = 5.0;
  const auto a = stationary_state_plus(6.0, pot, x - h), b = stationary_state_plus(6.0, pot, x),
             c = stationary_state_plus(6.0, pot, x + h);
  const cplx second = (a.value - 2.0 * b.value + c.value) / (h * h);
  CHECK(std::abs(second + 16.0 * b.value) < 1e-5);
}

TEST_CASE("opaque regime at p = 3") {
  const auto s = s_matrix(3.0, fixture::barrier());
  CHECK(std::norm(s.t) < 1e-6);
  CHECK(std::norm(s.r_left) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::norm(s.t) == doctest::Approx(barrier_transmission(3.0, 10.0, 10.0)).epsilon(1e-10));
  // kappa L ~ 33 and deeper: still finite
  const auto deep = s_matrix(0.5, PiecewisePotential::square_barrier(200.0, 0.0, 30.0));
  CHECK(std::isfinite(std::abs(deep.t)));
  CHECK(std::norm(deep.r_left) == doctest::Approx(1.0).epsilon(1e-12));
  const auto in = stationary_state_plus(0.5, PiecewisePotential::square_barrier(200.0, 0.0, 30.0), 15.0);
  CHECK(std::isfinite(std::abs(in.value)));
}

TEST_CASE("closed-form transmission over a sweep of momenta") {
  const auto pot = fixture::barrier();
  for (double p = 0.25; p < 20.0; p += 0.0731) {
    const auto s = s_matrix(p, pot);
    CHECK(std::norm(s.t) == doctest::Approx(barrier_transmission(p, 10.0, 10.0)).epsilon(1e-9));
  }
}

TEST_CASE("S-matrix agrees with an unscaled transfer-matrix product") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pd(0.1, 8.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pot = random_potential(rng);
    const double p = pd(rng);
    const auto s = s_matrix(p, pot);
    const auto ref = reference_s_matrix(p, pot, PhysicalUnits{});
    const double scale = 1e-9;
    CHECK(std::abs(s.t - ref.t) < scale);
    CHECK(std::abs(s.r_left - ref.r_left) < scale);
    CHECK(std::abs(s.r_right - ref.r_right) < scale);
  }
}

TEST_CASE("stationary state agrees with direct integration of the Schrodinger equation") {
  const PhysicalUnits u;
  const auto pot = fixture::barrier();
  for (double p : {6.0, 3.0, 4.4721, 5.2, 9.0}) {
    // integrate from the right free region, where psi = t N e^{ipx}, towards the left
    const ScatteringState state(p, pot, u);
    const double x_right = 12.0, x_left = -2.0;
    const auto start = state(x_right);
    OdeState y{start.value.real(), start.value.imag(), start.derivative.real(), start.derivative.imag()};
    for (double x : {9.0, 5.0, 1.0, -2.0}) {
      const double from = x == 9.0 ? x_right : (x == 5.0 ? 9.0 : (x == 1.0 ? 5.0 : 1.0));
      y = integrate_stationary(y, from, x, p, pot, u);
      const auto e = state(x);
      CAPTURE(p);
      CAPTURE(x);
      const double scale = std::max(1.0, std::abs(e.value));
      CHECK(std::abs(cplx(y[0], y[1]) - e.value) < 1e-8 * scale);
      CHECK(std::abs(cplx(y[2], y[3]) - e.derivative) < 1e-8 * scale * p);
    }
    // decompose at x_left into incident and reflected waves
    const cplx psi(y[0], y[1]), dpsi(y[2], y[3]);
    const cplx a = (psi + dpsi / (I * p)) / (2.0 * std::exp(I * p * x_left));
    const cplx b = (psi - dpsi / (I * p)) / (2.0 * std::exp(-I * p * x_left));
    const double n = 1.0 / std::sqrt(2.0 * pi);
    CHECK(std::abs(a - n) < 1e-8);
    CHECK(std::abs(b / a - state.reflection()) < 1e-8);
  }
}

TEST_CASE("unitarity and reciprocity on random potentials") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pd(0.1, 20.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pot = random_potential(rng);
    const double p = pd(rng);
    const auto s = s_matrix(p, pot);
    CHECK(std::abs(std::norm(s.t) + std::norm(s.r_left) - 1.0) <= 1e-10);
    CHECK(std::abs(std::norm(s.t) + std::norm(s.r_right) - 1.0) <= 1e-10);
    const ScatteringState from_right(-p, pot);
    CHECK(std::abs(from_right.transmission() - s.t) <= 1e-10);
  }
  CHECK_THROWS_AS(s_matrix(0.0, fixture::barrier()), std::domain_error);
  CHECK_THROWS_AS(s_matrix(-1.0, fixture::barrier()), std::domain_error);
}

TEST_CASE("continuity across edges and constant Wronskian") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pd(0.2, 12.0), sign(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pot = random_potential(rng);
    const double p = pd(rng) * (sign(rng) < 0.0 ? -1.0 : 1.0);
    const ScatteringState st(p, pot);
    // first-order Taylor extrapolation to the edge from both sides
    for (double e : pot.edges()) {
      const double eps = 1e-6;
      const auto lo = st(e - eps), hi = st(e + eps);
      const double energy = 0.5 * p * p;
      const cplx d2_lo = 2.0 * (pot(e - eps) - energy) * lo.value;
      const cplx d2_hi = 2.0 * (pot(e + eps) - energy) * hi.value;
      const cplx v_lo = lo.value + eps * lo.derivative, v_hi = hi.value - eps * hi.derivative;
      const cplx d_lo = lo.derivative + eps * d2_lo, d_hi = hi.derivative - eps * d2_hi;
      const double scale = std::max({std::abs(lo.value), std::abs(lo.derivative), 1e-300});
      CHECK(std::abs(v_lo - v_hi) <= 1e-9 * scale);
      CHECK(std::abs(d_lo - d_hi) <= 1e-9 * scale);
    }
    // Im(conj(psi) psi') is x-independent; its value is the flux (p/hbar)|t|^2/(2 pi hbar)
    const double expected = p * std::norm(st.transmission()) / (2.0 * pi);
    const auto edges = pot.edges();
    for (double x = edges.front() - 3.0; x <= edges.back() + 3.0; x += 0.173) {
      const auto e = st(x);
      const double w = std::imag(std::conj(e.value) * e.derivative);
      CHECK(std::abs(w - expected) <= 1e-10 * std::max(1.0, std::abs(p)));
    }
  }
}

TEST_CASE("threshold energy inside a segment") {
  // p^2 / 2 == V exactly in the middle segment
  const PiecewisePotential pot({{0.0, 1.0, 4.0}, {1.0, 2.0, 2.0}, {2.0, 3.0, 5.0}});
  const double p = 2.0;
  const auto s = s_matrix(p, pot);
  CHECK(std::abs(std::norm(s.t) + std::norm(s.r_left) - 1.0) < 1e-12);
  const auto near = s_matrix(p * (1.0 + 1e-9), pot);
  CHECK(std::abs(near.t - s.t) < 1e-6);
  const ScatteringState st(p, pot);
  const auto a = st(1.5), b = st(1.5 + 1e-4);
  // linear inside the segment
  CHECK(std::abs((b.value - a.value) / 1e-4 - a.derivative) < 1e-8);
}

TEST_CASE("incoming states are time-reversed outgoing states") {
  const auto pot = fixture::barrier();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pd(-15.0, 15.0), xd(-5.0, 15.0);
  for (int i = 0; i < 100; ++i) {
    const double p = pd(rng), x = xd(rng);
    if (p == 0.0) continue;
    const auto minus = stationary_state_minus(p, pot, x);
    const auto plus = stationary_state_plus(-p, pot, x);
    CHECK(std::abs(minus.value - std::conj(plus.value)) < 1e-15);
    CHECK(std::abs(minus.derivative - std::conj(plus.derivative)) < 1e-13);
  }
  CHECK(std::abs(stationary_state_minus(6.0, pot, 5.0).value) ==
        doctest::Approx(std::abs(stationary_state_plus(-6.0, pot, 5.0).value)));
  const auto free_minus = stationary_state_minus(2.5, PiecewisePotential{}, 1.3);
  CHECK(std::abs(free_minus.value - std::exp(I * 2.5 * 1.3) / std::sqrt(2.0 * pi)) < 1e-15);
  CHECK_THROWS_AS(stationary_state_plus(0.0, pot, 1.0), std::domain_error);
  CHECK_THROWS_AS(stationary_state_plus(1.0, pot, INFINITY), std::invalid_argument);
}

TEST_CASE("potential validation") {
  CHECK_THROWS_AS(PiecewisePotential({{1.0, 0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewisePotential({{0.0, 2.0, 1.0}, {1.0, 3.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewisePotential({{0.0, NAN, 1.0}}), std::invalid_argument);
  const auto pot = fixture::barrier();
  CHECK(pot(5.0) == 10.0);
  CHECK(pot(-1.0) == 0.0);
  CHECK(pot(11.0) == 0.0);
  CHECK(PiecewisePotential{}.is_free());
}

TEST_CASE("outgoing asymptote") {
  const auto pot = fixture::barrier();
  const auto phi = fixture::asymptote(fixture::packet, pot, 10.0, 120.0);

  SUBCASE("isometry") {
    const auto out = outgoing_asymptote(phi, pot);
    CHECK(out.norm_squared() == doctest::Approx(phi.norm_squared()).epsilon(1e-10));
  }
  SUBCASE("transmitted fraction is the quadrature of |t phi|^2") {
    const auto out = outgoing_asymptote(phi, pot);
    double transmitted = 0.0, expected = 0.0;
    for (std::size_t i = 0; i < out.grid.size(); ++i)
      if (out.grid.nodes()[i] > 0.0) transmitted += out.grid.weights()[i] * std::norm(out.values[i]);
    for (std::size_t i = 0; i < phi.grid.size(); ++i) {
      const double p = phi.grid.nodes()[i];
      expected += phi.grid.weights()[i] * barrier_transmission(p, 10.0, 10.0) * std::norm(phi.values[i]);
    }
    CHECK(transmitted == doctest::Approx(expected).epsilon(1e-10));
    CHECK(std::abs(transmitted - std::norm(s_matrix(6.0, pot).t)) < 0.02);
  }
  SUBCASE("free potential leaves the asymptote unchanged") {
    const auto out = outgoing_asymptote(phi, PiecewisePotential{});
    double diff = 0.0;
    for (std::size_t i = 0; i < out.grid.size(); ++i) {
      const double p = out.grid.nodes()[i];
      cplx in{};
      for (std::size_t j = 0; j < phi.grid.size(); ++j)
        if (phi.grid.nodes()[j] == p) in = phi.values[j];
      diff = std::max(diff, std::abs(out.values[i] - in));
    }
    CHECK(diff == 0.0);
  }
  SUBCASE("two-signed input must be split and symmetric") {
    const auto lopsided = build_momentum_grid(1.0, 2.0, 64);
    AsymptoteAmplitude a;
    a.grid = lopsided;
    a.values.assign(lopsided.size(), cplx(1.0, 0.0));
    CHECK_THROWS_AS(outgoing_asymptote(a, pot), std::invalid_argument);
    const auto sym = build_momentum_grid(0.0, 2.0, 64);
    a.grid = sym;
    a.values.assign(sym.size(), cplx(1.0, 0.0));
    CHECK_NOTHROW(outgoing_asymptote(a, pot));
  }
}

TEST_CASE("mirror_symmetric") {
  const auto g = build_momentum_grid(6.0, 4.0, 64);
  const auto m = mirror_symmetric(g);
  CHECK(m.size() == 128);
  CHECK(m.split_at_zero());
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m.nodes()[i] == -m.nodes()[m.size() - 1 - i]);
    CHECK(m.weights()[i] == m.weights()[m.size() - 1 - i]);
  }
}

TEST_CASE("resonance refinement resolves the S-matrix") {
  const auto pot = fixture::barrier();
  const PhysicalUnits u;
  PhaseBudget b;
  b.t_reach = 10.0;
  b.x_reach = 120.0;
  const auto coarse = build_resolved_momentum_grid(2.0, 10.0, b, u);
  const auto fine = resolve_s_matrix(coarse, pot, u);
  CHECK(fine.size() > coarse.size());
  CHECK(fine.lo() == coarse.lo());
  CHECK(fine.hi() == coarse.hi());
  CHECK(resolve_s_matrix(coarse, PiecewisePotential{}, u).size() == coarse.size());
  // the narrowest resonance sits just above the barrier top, k' L = pi
  const double p_res = std::sqrt(20.0 + std::pow(pi / 10.0, 2));
  double narrowest = 1.0;
  for (const auto& pn : fine.panels())
    if (pn.lo <= p_res && p_res <= pn.hi) narrowest = pn.hi - pn.lo;
  CHECK(narrowest < 0.01);

  // integral of |t|^2 against an adaptive reference
  auto integral = [&](const MomentumGrid& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.weights()[i] * barrier_transmission(g.nodes()[i], 10.0, 10.0);
    return s;
  };
  const double reference = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double p) { return barrier_transmission(p, 10.0, 10.0); }, 2.0, 10.0, 20, 1e-12);
  CHECK(std::abs(integral(fine) - reference) < 1e-9);
  CHECK(std::abs(integral(coarse) - reference) > 1e-6);
}
