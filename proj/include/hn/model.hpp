#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "hn/core.hpp"

namespace hn {

enum class Boundary { Open, Periodic };

const char* to_string(Boundary bc);
Boundary parse_boundary(const std::string& s);

/// Golden-ratio wavenumber (sqrt(5) - 1) / 2 of the quasi-periodic potential.
inline constexpr double kGoldenTheta = 0.6180339887498948482;

/// Parameters of the non-reciprocal chain
///
///   H = sum_j [ -(e^g c_j^+ c_{j+1} + e^-g c_{j+1}^+ c_j) + V n_j n_{j+1} + W_j n_j ],
///   W_j = W cos(2 pi theta j + theta0).
///
/// N == 0 selects the single-particle problem; N > 0 the fixed-N Fock sector.
struct ModelParams {
  int L = 2;
  double g = 0.0;
  double V = 0.0;
  double W = 0.0;
  double theta = kGoldenTheta;
  double theta0 = 0.0;
  Boundary bc = Boundary::Open;
  double phi = 0.0;
  int N = 0;
  /// Apply (-1)^(N-1) to hops across the periodic wrap bond (fermions).
  bool fermion_sign = true;

  bool many_body() const { return N > 0; }

  /// Flux actually used by the builders: reduced to [0, 2pi), zero for open chains.
  double effective_flux() const;

  /// Throws ValidationError when the parameter set is unusable.
  void validate() const;
};

double reduce_flux(double phi);

/// Non-interacting localization threshold 2 e^g of the quasi-periodic chain.
inline double critical_disorder(double g) { return 2.0 * std::exp(g); }

double potential(const ModelParams& params, int j);

// ---------------------------------------------------------------------------
// Fock basis
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultBasisCap = 10'000'000;

/// All L-bit words with exactly N set bits, in ascending integer order.
/// Bit j is the occupation of site j.
class FockBasis {
 public:
  FockBasis(int L, int N, std::size_t cap = kDefaultBasisCap);

  int sites() const { return L_; }
  int particles() const { return N_; }
  std::size_t size() const { return states_.size(); }
  std::uint64_t operator[](std::size_t i) const { return states_[i]; }
  std::span<const std::uint64_t> states() const { return states_; }

  /// Position of `word` in the basis. The word must have exactly N bits set.
  std::size_t index_of(std::uint64_t word) const;

 private:
  int L_;
  int N_;
  std::vector<std::uint64_t> states_;
};

FockBasis build_fock_basis(int L, int N, std::size_t cap = kDefaultBasisCap);

std::uint64_t binomial(int n, int k);

/// Colex rank of a word among words of equal popcount (= ascending order).
std::size_t combination_rank(std::uint64_t word);

// ---------------------------------------------------------------------------
// Hamiltonian
// ---------------------------------------------------------------------------

/// Single-particle chains below this length are stored dense.
inline constexpr int kDenseCap = 4096;

class HamiltonianMatrix {
 public:
  HamiltonianMatrix(ModelParams params, CMatrix dense);
  HamiltonianMatrix(ModelParams params, SparseCMatrix sparse);

  Eigen::Index dim() const;
  const ModelParams& params() const { return params_; }
  bool is_dense() const { return std::holds_alternative<CMatrix>(entries_); }

  const CMatrix& dense() const { return std::get<CMatrix>(entries_); }
  const SparseCMatrix& sparse() const { return std::get<SparseCMatrix>(entries_); }

  /// Materializes a dense copy regardless of storage.
  CMatrix to_dense() const;

  /// y = H x
  void apply(const CVector& x, CVector& y) const;
  CVector apply(const CVector& x) const;

  /// Largest absolute row sum.
  double norm_inf() const;

  /// True when every entry has zero imaginary part.
  bool is_real() const;

 private:
  ModelParams params_;
  std::variant<CMatrix, SparseCMatrix> entries_;
};

HamiltonianMatrix build_single_particle(const ModelParams& params);

HamiltonianMatrix build_many_body(const ModelParams& params, const FockBasis& basis);

/// Builds the single-particle or many-body matrix depending on params.N.
HamiltonianMatrix build_hamiltonian(const ModelParams& params);

}  // namespace hn
