#pragma once

// Wave-packet dynamics by eigenfunction expansion:
//   psi(x, t) = int dp phi_in(p) exp(-i E_p t / hbar) psi_p^+(x).

#include <span>
#include <vector>

#include "toa/asymptote.hpp"
#include "toa/core.hpp"
#include "toa/scattering.hpp"

namespace toa {

/// Minimum-uncertainty Gaussian with mean position x0, mean momentum p0 and
/// position standard deviation dx.
struct GaussianSpec {
  double x0 = 0.0;
  double p0 = 0.0;
  double dx = 1.0;

  void validate() const;
  double dp(const PhysicalUnits& units) const { return units.hbar / (2.0 * dx); }

  friend bool operator==(const GaussianSpec&, const GaussianSpec&) = default;
};

struct WaveField {
  std::vector<double> positions;
  /// Spatial quadrature weights; empty when the positions are not a grid.
  std::vector<double> weights;
  std::vector<cplx> values;
  std::vector<cplx> derivatives;
  double instant = 0.0;

  double norm_squared() const;
};

/// Momentum window [p0 - 8 dp, p0 + 8 dp] that holds the packet.
struct MomentumWindow {
  double lo = 0.0;
  double hi = 0.0;
};
MomentumWindow packet_window(const GaussianSpec& spec, const PhysicalUnits& units,
                             double widths = 8.0);

/// Packet window resolved for the phase budget, with panels refined
/// around narrow S-matrix structure of the potential. A window straddling
/// p = 0 is widened to be symmetric.
MomentumGrid packet_momentum_grid(const GaussianSpec& spec, const PiecewisePotential& potential,
                                  const PhaseBudget& budget, const PhysicalUnits& units = {});

/// phi(p) = (2 pi dp^2)^{-1/4} exp(-(p - p0)^2 / (4 dp^2)) exp(-i p x0 / hbar)
/// at reference time 0. Throws std::domain_error when the grid misses more
/// than 1e-8 of the norm.
AsymptoteAmplitude gaussian_asymptote(const GaussianSpec& spec, const MomentumGrid& grid,
                                      const PhysicalUnits& units = {});

/// Closed-form freely spreading Gaussian psi(x, t).
cplx free_gaussian(const GaussianSpec& spec, double x, double t, const PhysicalUnits& units = {});

/// Probability of negative momenta, erfc(p0 / (sqrt(2) dp)) / 2.
double negative_fraction(const GaussianSpec& spec, const PhysicalUnits& units = {});
/// Probability of negative momenta by quadrature over the grid's p < 0 nodes.
double negative_fraction(const AsymptoteAmplitude& phi);

WaveField evolve_full(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                      double t, std::span<const double> positions);
WaveField evolve_full(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                      double t, const SpatialGrid& grid);

WaveField evolve_free(const AsymptoteAmplitude& phi, double t, std::span<const double> positions);
WaveField evolve_free(const AsymptoteAmplitude& phi, double t, const SpatialGrid& grid);

/// Amplitude threshold at the ends of a spatial grid below which the field
/// is taken to be contained by it.
inline constexpr double kTruncationTolerance = 1e-8;

/// <p|psi(t)> = (2 pi hbar)^{-1/2} int dx exp(-i p x / hbar) psi(x, t), returned
/// as an asymptote specified at the field's instant. Throws std::domain_error
/// when |psi| at either grid end exceeds truncation_tolerance.
AsymptoteAmplitude momentum_representation(const WaveField& field, const MomentumGrid& grid,
                                           const PhysicalUnits& units = {},
                                           double truncation_tolerance = kTruncationTolerance);

/// J = (hbar / m) Im(conj(psi) dpsi/dx) at X. Exact at nodes; between nodes
/// psi is cubic-Hermite and dpsi/dx linearly interpolated.
double flux(const WaveField& field, double X, const PhysicalUnits& units = {});

/// psi(X, t) and dpsi/dx(X, t) straight from the momentum quadrature.
StationaryStateEval field_at(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                             double X, double t);

/// phi_in(p) = <p_+|psi0> for a Gaussian initial state, by spatial quadrature
/// of conj(psi_p^+(x)) psi0(x). Used to check the identification of the
/// initial Gaussian with its incoming asymptote.
AsymptoteAmplitude project_incoming(const GaussianSpec& initial, const PiecewisePotential& potential,
                                    const MomentumGrid& grid, const SpatialGrid& space,
                                    const PhysicalUnits& units = {});

}  // namespace toa
