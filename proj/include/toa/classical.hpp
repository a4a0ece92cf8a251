#pragma once

// Classical ensemble with the same position/momentum Gaussians as a
// quantum packet, traced exactly through a piecewise-constant potential.

#include <cstdint>
#include <span>
#include <vector>

#include "toa/arrivals.hpp"
#include "toa/core.hpp"
#include "toa/dynamics.hpp"
#include "toa/scattering.hpp"

namespace toa {

struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
  double w = 0.0;
};

struct ClassicalEnsemble {
  std::vector<PhasePoint> samples;

  /// Throws std::invalid_argument unless weights are positive and sum to 1.
  void validate() const;
};

struct ArrivalEvent {
  double time = 0.0;
  Side side = Side::Left;
  double weight = 0.0;
};

/// Product of N(x0, dx) in x and N(p0, hbar/(2 dx)) in p, equal weights,
/// drawn from a seeded mt19937_64.
ClassicalEnsemble sample_gaussian_ensemble(const GaussianSpec& spec, std::size_t count,
                                           std::uint64_t seed, const PhysicalUnits& units = {});

/// One ballistic leg: the particle is at x with momentum p from time t on.
struct Leg {
  double t = 0.0;
  double x = 0.0;
  double p = 0.0;
};

struct Trajectory {
  std::vector<Leg> legs;
  double energy = 0.0;
  double t_end = 0.0;
  double x_end = 0.0;
};

/// Event-driven trajectory up to t_max. At an edge the particle transmits
/// when E > V beyond it and reflects otherwise (E == V reflects).
Trajectory trace_trajectory(double x, double p, const PiecewisePotential& potential, double t_max,
                            const PhysicalUnits& units = {});

/// Every crossing of X in (0, t_max], tagged with the side the particle
/// comes from.
std::vector<ArrivalEvent> trace_arrivals(const ClassicalEnsemble& ensemble,
                                         const PiecewisePotential& potential, double X,
                                         double t_max, const PhysicalUnits& units = {});

/// Gaussian-kernel density of the events per side: left = J_cl^L,
/// right = -J_cl^R >= 0, total = left + right. The kind field is not
/// meaningful for this series.
DistributionSeries classical_distribution(std::span<const ArrivalEvent> events, double X,
                                          const TimeGrid& times, double bandwidth);

/// Signed classical flux J_cl^L + J_cl^R, the same kernel density with
/// right-moving crossings counted positive and left-moving negative.
std::vector<double> classical_flux(std::span<const ArrivalEvent> events, const TimeGrid& times,
                                   double bandwidth);

}  // namespace toa
