#include "hn/topology.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace hn {

namespace {

constexpr double kPi = std::numbers::pi;

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

void WindingConfig::validate() const {
  if (n_points < 3) throw ValidationError("winding grid needs at least 3 points");
  if (!(det_floor > 0.0)) throw ValidationError("det_floor must be positive");
}

double wrap_phase(double angle) {
  double r = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

LogDet log_det_phase(const CMatrix& A, cplx e0, double det_floor) {
  if (A.rows() != A.cols()) throw ValidationError("log_det_phase needs a square matrix");
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (n == 0) return {};

  CMatrix lu = A;
  lu.diagonal().array() -= e0;
  const double scale = std::max(1.0, lu.cwiseAbs().maxCoeff());
  std::vector<lapack_int> ipiv(n);
  const lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, lu.data(), n, ipiv.data());
  if (info < 0) throw NumericalError("zgetrf rejected its arguments");

  LogDet out;
  double phase = 0.0;
  for (lapack_int i = 0; i < n; ++i) {
    const cplx u = lu(i, i);
    const double mag = std::abs(u);
    if (!(mag > det_floor * scale))
      throw SingularAtBaseEnergy("det[H - E0] is singular: E0 coincides with an eigenvalue");
    out.log_magnitude += std::log(mag);
    phase = wrap_phase(phase + std::arg(u) + (ipiv[i] != i + 1 ? kPi : 0.0));
  }
  out.phase = phase;
  return out;
}

LogDet log_det_phase(const HamiltonianMatrix& H, cplx e0, double det_floor) {
  return log_det_phase(H.to_dense(), e0, det_floor);
}

namespace {

// Phases of det[H(phi_s) - E0] on the grid, or nullopt when a grid point is singular.
std::optional<std::vector<double>> sample_phases(const ModelParams& base, const FockBasis* basis,
                                                 const WindingConfig& cfg, double offset) {
  std::vector<double> phases(cfg.n_points);
  ModelParams p = base;
  for (int s = 0; s < cfg.n_points; ++s) {
    p.phi = 2.0 * kPi * (s + offset) / cfg.n_points;
    const HamiltonianMatrix h = basis ? build_many_body(p, *basis) : build_single_particle(p);
    try {
      phases[s] = log_det_phase(h, cfg.e0, cfg.det_floor).phase;
    } catch (const SingularAtBaseEnergy&) {
      return std::nullopt;
    }
  }
  return phases;
}

}  // namespace

WindingResult winding_number(const ModelParams& params, const WindingConfig& cfg) {
  params.validate();
  cfg.validate();
  if (params.bc != Boundary::Periodic)
    throw ValidationError("winding number needs periodic boundaries");

  std::optional<FockBasis> basis;
  if (params.many_body()) basis.emplace(params.L, params.N);
  const FockBasis* bptr = basis ? &*basis : nullptr;

  WindingResult result;
  auto phases = sample_phases(params, bptr, cfg, 0.0);
  if (!phases) {
    result.shifted_grid = true;
    result.warnings.push_back("singular grid point; grid shifted by half a step");
    phases = sample_phases(params, bptr, cfg, 0.5);
    if (!phases)
      throw IllDefinedWinding("det[H(phi) - E0] vanishes on both the grid and the shifted grid; "
                              "E0 lies on the spectral curve");
  }

  // H(2 pi) == H(0), so the loop closes on the first sample.
  const int n = cfg.n_points;
  result.step_phase.resize(n);
  double total = 0.0;
  for (int s = 0; s < n; ++s) {
    const double d = wrap_phase((*phases)[(s + 1) % n] - (*phases)[s]);
    result.step_phase[s] = d;
    result.max_step = std::max(result.max_step, std::abs(d));
    total += d;
  }
  result.raw = total / (2.0 * kPi);
  result.nu = static_cast<int>(std::lround(result.raw));

  if (result.max_step > kPi / 2)
    result.warnings.push_back("phase step " + format_double(result.max_step) +
                              " exceeds pi/2; flux grid may be too coarse");
  if (std::abs(result.raw - result.nu) > 0.05)
    result.warnings.push_back("accumulated winding " + format_double(result.raw) +
                              " is not close to an integer");
  return result;
}

}  // namespace hn
