#pragma once

#include <vector>

#include "toa/core.hpp"

namespace toa {

/// Momentum amplitude phi(p) of a freely evolving state, specified at
/// reference_time. At any other time t the amplitude is
/// phi(p) exp(-i E_p (t - reference_time) / hbar).
struct AsymptoteAmplitude {
  MomentumGrid grid;
  std::vector<cplx> values;
  double reference_time = 0.0;
  PhysicalUnits units;

  /// Integral of |phi|^2 over the grid.
  double norm_squared() const;
  /// Integral of p |phi|^2 over the grid.
  double mean_momentum() const;
  /// Same state specified at a later reference time with the same values,
  /// i.e. the whole history shifted by tau.
  AsymptoteAmplitude time_shifted(double tau) const;
  /// The state freely evolved by tau, kept at the same reference time.
  AsymptoteAmplitude freely_evolved(double tau) const;
};

}  // namespace toa
