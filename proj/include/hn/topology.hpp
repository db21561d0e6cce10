#pragma once

#include <string>
#include <vector>

#include "hn/core.hpp"
#include "hn/model.hpp"

namespace hn {

struct WindingConfig {
  /// Flux grid size; the loop is sampled at 2 pi s / n_points, s = 0..n_points.
  int n_points = 201;
  /// Base energy E0.
  cplx e0 = 0.0;
  /// A pivot with |u_ii| below det_floor * max|H_ij| marks det[H - E0] as singular.
  double det_floor = 1e-300;

  void validate() const;
};

/// log|det A| and arg det A in (-pi, pi].
struct LogDet {
  double log_magnitude = 0.0;
  double phase = 0.0;
};

/// Partial-pivot LU of (A - e0); accumulates log|u_ii| and arg u_ii plus pi per row swap.
/// Throws SingularAtBaseEnergy when a pivot underflows.
LogDet log_det_phase(const CMatrix& A, cplx e0 = 0.0, double det_floor = 1e-300);
LogDet log_det_phase(const HamiltonianMatrix& H, cplx e0 = 0.0, double det_floor = 1e-300);

/// Maps an angle to (-pi, pi].
double wrap_phase(double angle);

struct WindingResult {
  int nu = 0;
  /// Accumulated phase / 2 pi before rounding.
  double raw = 0.0;
  /// Per-step wrapped phase differences of det[H(phi) - E0] (the dH(phi) diagnostic).
  std::vector<double> step_phase;
  double max_step = 0.0;
  /// True when the grid had to be shifted by half a step to dodge a singular point.
  bool shifted_grid = false;
  std::vector<std::string> warnings;
};

/// Winding of det[H(phi) - E0] as the boundary twist goes once around. Requires
/// periodic boundaries; params.phi is ignored. Uses the Fock sector when params.N > 0.
WindingResult winding_number(const ModelParams& params, const WindingConfig& cfg = {});

}  // namespace hn
