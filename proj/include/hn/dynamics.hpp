#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hn/core.hpp"
#include "hn/model.hpp"
#include "hn/spectral.hpp"

namespace hn {

enum class Method { Exact, Krylov };

const char* to_string(Method m);
Method parse_method(const std::string& s);

struct EvolverConfig {
  Method method = Method::Krylov;
  /// Krylov dimension; clamped to the Hilbert-space dimension.
  int M = 15;
  double dt = 0.2;
  bool renormalize = true;
  double t_max = 10.0;
  int record_stride = 1;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Initial states
// ---------------------------------------------------------------------------

/// Particle on site j0.
CVector initial_localized(int L, int j0);

/// The last N sites occupied: |0...01...1>.
CVector initial_domain_wall(const FockBasis& basis);

// ---------------------------------------------------------------------------
// Propagators
// ---------------------------------------------------------------------------

/// sum_n c_n e^{-i e_n t} |n> with c_n = <<n|psi0>. Normalized when `renormalize`.
CVector evolve_exact(const SpectralDecomposition& spec, const CVector& psi0, double t,
                     bool renormalize = true);

/// Diagnostics of the last Krylov step.
struct KrylovInfo {
  /// Krylov dimension actually used (smaller than requested on an invariant subspace).
  int dimension = 0;
  bool invariant_subspace = false;
  /// Norm growth factor ||psi(t+dt)|| / ||psi(t)|| before renormalization.
  double norm_growth = 1.0;
  bool used_pade = false;
};

inline constexpr double kArnoldiBreakdown = 1e-14;
inline constexpr double kEigenvectorConditionCap = 1e8;

/// One Arnoldi step psi -> V_M exp(-i dt H_M) e_1 ||psi|| with H_M the Hessenberg
/// projection built with full Gram-Schmidt plus one reorthogonalization pass.
/// Returns the normalized vector when `renormalize`, else the raw one.
CVector arnoldi_step(const HamiltonianMatrix& H, const CVector& psi, int M, double dt,
                     bool renormalize = true, KrylovInfo* info = nullptr);

/// exp(-i dt A) e_1 for a small dense matrix: eigendecomposition when the eigenvector
/// basis is well conditioned, Pade scaling-and-squaring otherwise.
CVector small_propagator_first_column(const CMatrix& A, double dt, bool* used_pade = nullptr);

// ---------------------------------------------------------------------------
// Entanglement
// ---------------------------------------------------------------------------

/// Singular values of the (left sites | right sites) amplitude matrix.
RVector schmidt_values(const CVector& psi, const FockBasis& basis, int cut);

/// Von Neumann entropy of the right half (sites cut..L-1). cut < 0 means L/2.
double entanglement_entropy(const CVector& psi, const FockBasis& basis, int cut = -1);

// ---------------------------------------------------------------------------
// Time series
// ---------------------------------------------------------------------------

enum class Observable { Density, Entanglement, FockIpr, Ipr, MaxImagOverlap, Norm };

const char* to_string(Observable o);
Observable parse_observable(const std::string& s);

struct ObservableRecord {
  double t = 0.0;
  std::string name;
  /// Site index for vector observables, -1 for scalars.
  int index = -1;
  double value = 0.0;
};

/// Records of a single evolution. An optional sink sees every record as it is produced,
/// so a crashed run still leaves everything written up to that point.
class ObservableSeries {
 public:
  using Sink = std::function<void(const ObservableRecord&)>;

  ObservableSeries() = default;
  explicit ObservableSeries(Sink sink) : sink_(std::move(sink)) {}

  void add(double t, std::string name, int index, double value);

  const std::vector<ObservableRecord>& records() const { return records_; }
  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  /// (t, value) pairs of a scalar observable in time order.
  std::vector<std::pair<double, double>> scalar(const std::string& name) const;
  /// Rows of a vector observable: one vector per recorded time.
  std::vector<std::pair<double, RVector>> profile(const std::string& name) const;

 private:
  Sink sink_;
  std::vector<ObservableRecord> records_;
  std::map<std::string, std::string> metadata_;
};

/// Evolves `initial` under H(params) from t = 0 to cfg.t_max, recording the requested
/// observables every cfg.record_stride steps (and at t = 0).
ObservableSeries run(const ModelParams& params, const EvolverConfig& cfg, const CVector& initial,
                     const std::set<Observable>& observables,
                     ObservableSeries::Sink sink = nullptr);

/// Participation number (sum_j p_j)^2 / sum_j p_j^2 of a probability profile.
double participation_width(const RVector& density);

/// Root-mean-square distance of a profile from its centre of mass.
double rms_width(const RVector& density);

}  // namespace hn
