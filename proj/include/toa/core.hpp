#pragma once

// Units, quadrature grids and time grids shared by every other module.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace toa {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

struct PhysicalUnits {
  double hbar = 1.0;
  double mass = 1.0;

  /// Throws std::invalid_argument unless both are positive and finite.
  void validate() const;

  double energy(double p) const { return p * p / (2.0 * mass); }

  friend bool operator==(const PhysicalUnits&, const PhysicalUnits&) = default;
};

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(std::size_t n);

/// One Gauss-Legendre panel of a composite rule. Nodes of the panel are the
/// half-open index range [begin, begin + count) of the parent grid.
struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t begin = 0;
  std::size_t count = 0;
};

struct PanelSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Composite Gauss-Legendre rule. Tag distinguishes momentum from position
/// grids at compile time; the two never mix.
template <class Tag>
class QuadratureGrid {
 public:
  QuadratureGrid() = default;

  /// Panel breaks must be strictly increasing; counts.size() == breaks.size() - 1.
  static QuadratureGrid composite(std::span<const double> breaks,
                                  std::span<const std::size_t> counts);
  /// Panels ordered and non-overlapping; gaps between them are allowed.
  static QuadratureGrid from_panels(std::span<const PanelSpec> panels);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Panel>& panels() const { return panels_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  double lo() const { return panels_.empty() ? 0.0 : panels_.front().lo; }
  double hi() const { return panels_.empty() ? 0.0 : panels_.back().hi; }

  /// True when no panel has 0 strictly inside it.
  bool split_at_zero() const;
  bool has_negative() const { return !nodes_.empty() && nodes_.front() < 0.0; }
  bool has_positive() const { return !nodes_.empty() && nodes_.back() > 0.0; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<Panel> panels_;
};

struct MomentumTag {};
struct PositionTag {};
using MomentumGrid = QuadratureGrid<MomentumTag>;
using SpatialGrid = QuadratureGrid<PositionTag>;

extern template class QuadratureGrid<MomentumTag>;
extern template class QuadratureGrid<PositionTag>;

/// Largest node count placed in a single panel by the grid builders.
inline constexpr std::size_t kPanelNodes = 32;
/// Resolution floor: nodes per oscillation of the integrand's phase.
inline constexpr double kNodesPerOscillation = 8.0;

/// Gauss-Legendre nodes on [center - halfwidth, center + halfwidth] with
/// `count` nodes in total, in panels of at most kPanelNodes. An interval
/// straddling p = 0 is split there, nodes allotted in proportion to length.
MomentumGrid build_momentum_grid(double center, double halfwidth, std::size_t count);

/// Phase budget of a momentum integrand exp(-i E_p t / hbar + i p x / hbar):
/// the largest |t| and |x| it is evaluated at.
struct PhaseBudget {
  double t_reach = 0.0;
  double x_reach = 0.0;
  /// Upper bound on panel width regardless of phase (resolves amplitude
  /// structure such as transmission resonances).
  double max_panel_width = 0.5;
};

/// Composite grid on [lo, hi] whose panels each hold at most
/// kPanelNodes / kNodesPerOscillation oscillations of the budgeted phase.
/// Split at p = 0 when 0 is interior.
MomentumGrid build_resolved_momentum_grid(double lo, double hi, const PhaseBudget& budget,
                                          const PhysicalUnits& units);

/// Number of phase oscillations of the budgeted integrand across one panel.
double panel_oscillations(const Panel& panel, double t, double x_reach,
                          const PhysicalUnits& units);

/// Throws std::domain_error naming the first panel with fewer than
/// kNodesPerOscillation nodes per oscillation of exp(-i E_p t + i p x).
void check_phase_resolution(const MomentumGrid& grid, double t, double x_reach,
                            const PhysicalUnits& units);

/// Spatial composite grid on [lo, hi]. Panels never straddle a break and are
/// narrow enough to hold kNodesPerOscillation nodes per oscillation of
/// exp(i k x) for |k| <= max_wavenumber.
SpatialGrid build_spatial_grid(double lo, double hi, std::span<const double> breaks,
                               double max_wavenumber);

/// Spatial grid with roughly `count` nodes spread over uniform panels, with
/// additional panel boundaries at every break inside (lo, hi).
SpatialGrid build_spatial_grid_with_count(double lo, double hi, std::span<const double> breaks,
                                          std::size_t count);

template <class Tag>
cplx integrate(std::span<const cplx> samples, const QuadratureGrid<Tag>& grid);

template <class Tag>
double integrate(std::span<const double> samples, const QuadratureGrid<Tag>& grid);

class TimeGrid {
 public:
  TimeGrid(double t_min, double t_max, std::size_t count);

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  std::size_t count() const { return count_; }
  double step() const { return (t_max_ - t_min_) / static_cast<double>(count_ - 1); }
  double operator[](std::size_t i) const;
  std::vector<double> nodes() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t_min_;
  double t_max_;
  std::size_t count_;
};

}  // namespace toa
