#pragma once

#include <optional>
#include <vector>

#include "hn/core.hpp"
#include "hn/model.hpp"

namespace hn {

/// Eigenvalues with paired right/left eigenvectors.
///
/// Columns of `right` have unit 2-norm. When left vectors were requested, column n of
/// `left` is scaled so that left.col(n).adjoint() * right.col(m) == delta(n, m), i.e.
/// the left eigenvector <<n| is left.col(n)^dagger.
struct SpectralDecomposition {
  CVector eigenvalues;
  CMatrix right;
  std::optional<CMatrix> left;

  Eigen::Index dim() const { return eigenvalues.size(); }
  bool biorthogonal() const { return left.has_value(); }

  /// max_{n,m} |<<n|m> - delta_nm|
  double biorthogonality_residual() const;
  /// Frobenius norm of sum_n |n><<n| - 1
  double completeness_residual() const;
  /// max_n |H r_n - e_n r_n| / ||H||_inf
  double eigen_residual(const HamiltonianMatrix& H) const;

  /// Index of the eigenvalue with largest imaginary part.
  Eigen::Index max_imag_index() const;
};

struct DecomposeOptions {
  bool left = true;
  /// Eigenvalues closer than this cannot be paired reliably.
  double collision_guard = 1e-12;
  /// Dense path refuses larger matrices.
  Eigen::Index dense_cap = 8192;
};

/// Full eigendecomposition; triplets sorted by ascending Re, ties by ascending Im.
/// Throws BiorthogonalizationError when left vectors are requested and two eigenvalues
/// sit within `collision_guard` of each other.
SpectralDecomposition decompose(const HamiltonianMatrix& H, const DecomposeOptions& opts = {});
SpectralDecomposition decompose(const CMatrix& H, const DecomposeOptions& opts = {});

/// Smallest pairwise eigenvalue distance.
double min_eigenvalue_gap(const CVector& eigenvalues);

// ---------------------------------------------------------------------------
// Static observables
// ---------------------------------------------------------------------------

/// sum_j |psi_j|^4 of the normalized vector. Throws on a zero vector.
double ipr(const CVector& state);

/// Same functional over Fock amplitudes.
inline double fock_ipr(const CVector& state) { return ipr(state); }

/// Mean IPR over all right eigenvectors.
double mean_ipr(const SpectralDecomposition& spec);

inline constexpr double kImagThreshold = 1e-13;

/// Fraction of eigenvalues with |Im e| above threshold.
double imag_fraction(const CVector& eigenvalues, double threshold = kImagThreshold);
inline double imag_fraction(const SpectralDecomposition& spec, double threshold = kImagThreshold) {
  return imag_fraction(spec.eigenvalues, threshold);
}

/// <n_j> = |psi_j|^2 for a normalized single-particle state.
RVector density_profile(const CVector& state);

/// <n_j> = sum_s |c_s|^2 bit_j(s) for a normalized Fock-space state.
RVector density_profile(const CVector& state, const FockBasis& basis);

/// Biorthogonal expectation Re <<mu|n_j|mu> with <<mu|mu> = 1.
RVector biorthogonal_density(const CVector& right, const CVector& left);
RVector biorthogonal_density(const CVector& right, const CVector& left, const FockBasis& basis);

enum class DensityConvention { RightRight, Biorthogonal };

/// Density averaged over all eigenstates of the decomposition.
/// `basis` is null for the single-particle problem.
RVector mean_density(const SpectralDecomposition& spec, const FockBasis* basis,
                     DensityConvention convention = DensityConvention::RightRight);

/// (1/L) |sum_i (-1)^i n_i|
double cdw_order(const RVector& density);

/// Eigenstate with the smallest real part (the ground state of a real spectrum).
Eigen::Index ground_state_index(const SpectralDecomposition& spec);

}  // namespace hn
