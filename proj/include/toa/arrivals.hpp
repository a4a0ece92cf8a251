#pragma once

// Time-of-arrival distributions at a point X as squared overlaps of the
// evolving state with left/right crossing states,
//   Pi(T) = sum_beta |<psi(T)|u^beta(X)>|^2.
//
// KijowskiFree    crossing states (|p|/m)^{1/2} Theta(alpha p)|X>, free motion
// Proposal1       same crossing states, state evolved with the full Hamiltonian
// Proposal2Plus/Minus  Kijowski distribution of the incoming/outgoing asymptote
// Proposal3Plus/Minus  Moller-dressed crossing states, evaluated in the
//                      scattering basis where <p_+|psi(T)> = phi_in(p) e^{-iE_p T}

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toa/asymptote.hpp"
#include "toa/core.hpp"
#include "toa/dynamics.hpp"
#include "toa/scattering.hpp"

namespace toa {

enum class Side { Left, Right };

/// +1 for Left, -1 for Right.
constexpr int alpha(Side side) { return side == Side::Left ? 1 : -1; }
constexpr Side side_of_sign(int sign) { return sign > 0 ? Side::Left : Side::Right; }

enum class CrossingKind {
  KijowskiFree,
  Proposal1,
  Proposal2Plus,
  Proposal2Minus,
  Proposal3Plus,
  Proposal3Minus,
};

enum class Branch { Plus, Minus };

/// Tags: kijowski-free, pi1, pi2+, pi2-, pi3+, pi3-.
std::string_view to_string(CrossingKind kind);
/// Throws std::invalid_argument for an unknown tag.
CrossingKind parse_kind(std::string_view tag);
/// Proposal2/3 kinds are defined through Moller operators.
bool needs_scattering_context(CrossingKind kind);

struct DistributionSeries {
  CrossingKind kind = CrossingKind::KijowskiFree;
  double X = 0.0;
  TimeGrid times{0.0, 1.0, 2};
  std::vector<double> left;
  std::vector<double> right;
  std::vector<double> total;
};

struct FluxSeries {
  double X = 0.0;
  TimeGrid times{0.0, 1.0, 2};
  std::vector<double> values;
};

struct Peak {
  std::size_t index = 0;
  double time = 0.0;
  double height = 0.0;
};

/// Global maximum over the grid, refined by a parabola through the three
/// samples around it.
Peak find_peak(std::span<const double> values, const TimeGrid& times);

/// <u_K^beta(X)|psi_free(T)> =
///   int dp Theta(alpha p) (|p|/m)^{1/2} (2 pi hbar)^{-1/2} e^{ipX/hbar} phi(p) e^{-iE_p (T - t_ref)/hbar}
cplx kijowski_overlap(const AsymptoteAmplitude& phi, Side side, double X, double T);

DistributionSeries kijowski(const AsymptoteAmplitude& phi, double X, const TimeGrid& times);

/// Spatial grid for psi(T) and momentum grid for <p|psi(T)> used by Pi_1.
struct Pi1Numerics {
  SpatialGrid space;
  MomentumGrid transform;
  /// Largest |psi(T)| tolerated at the ends of `space`.
  double truncation_tolerance = kTruncationTolerance;
};

/// Transform grid on [-cutoff, cutoff], split at 0, resolving exp(ip(X - x))
/// across the spatial grid for every X in arrival_points.
Pi1Numerics make_pi1_numerics(SpatialGrid space, double cutoff,
                              std::span<const double> arrival_points,
                              const PhysicalUnits& units = {},
                              double truncation_tolerance = kTruncationTolerance);

/// Spatial window outside which a Gaussian packet stays below the truncation
/// tolerance up to time t_max (free, reflected or transmitted), widened to
/// contain `must_contain`.
std::pair<double, double> packet_extent(const GaussianSpec& spec, double t_max,
                                        std::span<const double> must_contain,
                                        const PhysicalUnits& units = {});

/// Pi_1: Kijowski crossing states applied to the fully evolved state,
/// through psi(x, T) on numerics.space and <p|psi(T)> on numerics.transform.
/// The T-independent sums are contracted once per X; throws
/// std::domain_error when psi(T) reaches the spatial grid ends.
DistributionSeries pi1(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                       double X, const TimeGrid& times, const Pi1Numerics& numerics);

/// Pi_1^L(T), Pi_1^R(T) at a single instant by the explicit route
/// evolve_full -> momentum_representation -> kijowski_overlap.
std::pair<double, double> pi1_by_field(const AsymptoteAmplitude& phi_in,
                                       const PiecewisePotential& potential, double X, double T,
                                       const Pi1Numerics& numerics);

DistributionSeries pi2(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                       Branch branch, double X, const TimeGrid& times);

DistributionSeries pi3(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                       Branch branch, double X, const TimeGrid& times);

/// J(X, T) from psi and dpsi/dx evaluated straight from the momentum quadrature.
FluxSeries flux_series(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                       double X, const TimeGrid& times);

struct BundleRequest {
  std::vector<CrossingKind> kinds;
  bool with_flux = false;
};

struct Bundle {
  std::vector<DistributionSeries> series;
  std::optional<FluxSeries> flux;

  /// Throws std::out_of_range when the kind was not requested.
  const DistributionSeries& at(CrossingKind kind) const;
};

/// All requested kinds at one X, sharing stationary states at X and the
/// outgoing asymptote. pi1_numerics is required when Proposal1 is requested.
Bundle series_bundle(const AsymptoteAmplitude& phi_in, const PiecewisePotential& potential,
                     double X, const TimeGrid& times, const BundleRequest& request,
                     const Pi1Numerics* pi1_numerics = nullptr);

}  // namespace toa
