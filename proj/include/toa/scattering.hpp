#pragma once

// Stationary scattering states and S-matrix for piecewise-constant potentials.
//
// Plane waves are delta-normalized, <x|p> = exp(i p x / hbar) / sqrt(2 pi hbar).
// psi_p^+ for p > 0 is incident from the left:
//   x < left edge:   N (exp(ipx) + r_left exp(-ipx))
//   x > right edge:  N t exp(ipx)
// and mirrored for p < 0 (incident from the right, reflection r_right).

#include <vector>

#include "toa/asymptote.hpp"
#include "toa/core.hpp"

namespace toa {

struct Segment {
  double x_left = 0.0;
  double x_right = 0.0;
  double height = 0.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Finite sequence of constant-potential segments; V = 0 everywhere else.
class PiecewisePotential {
 public:
  PiecewisePotential() = default;
  /// Segments must be ordered, non-overlapping, with x_left < x_right.
  explicit PiecewisePotential(std::vector<Segment> segments);

  static PiecewisePotential square_barrier(double height, double x_left, double x_right);

  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  /// True when every segment has zero height (including no segments).
  bool is_free() const;
  double operator()(double x) const;
  /// Sorted distinct segment edges.
  std::vector<double> edges() const;
  /// V(-x).
  PiecewisePotential mirrored() const;

  friend bool operator==(const PiecewisePotential&, const PiecewisePotential&) = default;

 private:
  std::vector<Segment> segments_;
};

struct SMatrixEntry {
  double p = 0.0;
  cplx t;
  cplx r_left;
  cplx r_right;
};

struct StationaryStateEval {
  double p = 0.0;
  double x = 0.0;
  cplx value;
  cplx derivative;
};

/// psi_p^+ for one signed momentum, solved once and evaluated anywhere.
class ScatteringState {
 public:
  ScatteringState(double p, const PiecewisePotential& potential, const PhysicalUnits& units = {});

  double momentum() const { return p_; }
  /// Transmission amplitude for incidence from the side p points away from.
  cplx transmission() const { return t_; }
  /// Reflection amplitude for incidence from the side p points away from.
  cplx reflection() const { return r_; }

  StationaryStateEval operator()(double x) const;

 private:
  enum class Kind { Oscillatory, Evanescent, Threshold };

  // Solution inside one finite region [x0, x0 + width], stored with a log
  // scale so that opaque barriers never overflow.
  struct Region {
    double x0 = 0.0;
    double width = 0.0;
    Kind kind = Kind::Oscillatory;
    double k = 0.0;  // wavenumber, decay constant, or signed k^2 for Threshold
    cplx a, b;       // coefficients, see evaluate_region
    double log_scale = 0.0;
  };

  StationaryStateEval evaluate_left_incidence(double y) const;

  double p_;
  bool mirrored_;
  double k_;           // |p| / hbar
  double norm_;        // (2 pi hbar)^{-1/2}
  std::vector<double> bounds_;
  std::vector<Region> regions_;  // regions_[i] spans [bounds_[i], bounds_[i+1]]
  cplx left_in_, left_out_;      // outer-left coefficients of exp(+-ik(y - bounds_.front()))
  cplx right_out_;               // outer-right coefficient of exp(ik(y - bounds_.back()))
  cplx t_, r_;
};

/// Outgoing-boundary-condition Lippmann-Schwinger state psi_p^+(x).
StationaryStateEval stationary_state_plus(double p, const PiecewisePotential& potential, double x,
                                          const PhysicalUnits& units = {});

/// Incoming-boundary-condition state psi_p^-(x) = conj(psi_{-p}^+(x)).
StationaryStateEval stationary_state_minus(double p, const PiecewisePotential& potential, double x,
                                           const PhysicalUnits& units = {});

SMatrixEntry s_matrix(double p, const PiecewisePotential& potential, const PhysicalUnits& units = {});

/// phi_out = S phi_in:
///   p > 0:  t(p) phi_in(p) + r_right(p) phi_in(-p)
///   p < 0:  t(|p|) phi_in(p) + r_left(|p|) phi_in(-p)
/// A one-signed input grid is extended by its mirror image (phi_in = 0 there);
/// a two-signed grid must be split at 0 and symmetric under p -> -p.
AsymptoteAmplitude outgoing_asymptote(const AsymptoteAmplitude& phi_in,
                                      const PiecewisePotential& potential);

/// Grid together with its mirror image under p -> -p. Two-signed input must
/// already be symmetric and is returned unchanged.
MomentumGrid mirror_symmetric(const MomentumGrid& grid);

/// Splits panels of `grid` until Gauss-Legendre integrates t(|p|) and r(|p|)
/// over each panel to within tolerance * width, checked against its two
/// halves. Resolves narrow transmission resonances. Returns the grid
/// unchanged for a free potential.
MomentumGrid resolve_s_matrix(const MomentumGrid& grid, const PiecewisePotential& potential,
                              const PhysicalUnits& units = {}, double tolerance = 1e-11);

}  // namespace toa
