#include "hn/spectral.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace hn {

namespace {

struct RawEigen {
  CVector values;
  CMatrix right;
  CMatrix left;  // LAPACK convention: u^H A = lambda u^H, unit 2-norm
};

// LAPACK balances (permutes and scales) before the QR iteration; the OBC chain is
// exponentially non-normal and needs it.
RawEigen eig_real(const Eigen::MatrixXd& a, bool want_left) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::MatrixXd work = a;
  Eigen::VectorXd wr(n), wi(n);
  Eigen::MatrixXd vl(want_left ? n : 1, want_left ? n : 1), vr(n, n);
  const lapack_int info =
      LAPACKE_dgeev(LAPACK_COL_MAJOR, want_left ? 'V' : 'N', 'V', n, work.data(), n, wr.data(),
                    wi.data(), vl.data(), want_left ? n : 1, vr.data(), n);
  if (info != 0) throw NumericalError("dgeev failed, info=" + std::to_string(info));

  RawEigen out;
  out.values.resize(n);
  out.right.resize(n, n);
  if (want_left) out.left.resize(n, n);
  const cplx i1(0.0, 1.0);
  for (lapack_int j = 0; j < n; ++j) {
    out.values(j) = cplx(wr(j), wi(j));
    if (wi(j) == 0.0) {
      out.right.col(j) = vr.col(j).cast<cplx>();
      if (want_left) out.left.col(j) = vl.col(j).cast<cplx>();
    } else {
      // conjugate pair stored as (re, im) column pair
      out.values(j + 1) = cplx(wr(j + 1), wi(j + 1));
      out.right.col(j) = vr.col(j).cast<cplx>() + i1 * vr.col(j + 1).cast<cplx>();
      out.right.col(j + 1) = out.right.col(j).conjugate();
      if (want_left) {
        out.left.col(j) = vl.col(j).cast<cplx>() + i1 * vl.col(j + 1).cast<cplx>();
        out.left.col(j + 1) = out.left.col(j).conjugate();
      }
      ++j;
    }
  }
  return out;
}

RawEigen eig_complex(const CMatrix& a, bool want_left) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  CMatrix work = a;
  RawEigen out;
  out.values.resize(n);
  out.right.resize(n, n);
  out.left.resize(want_left ? n : 1, want_left ? n : 1);
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, want_left ? 'V' : 'N', 'V', n, work.data(), n,
                    out.values.data(), out.left.data(), want_left ? n : 1, out.right.data(), n);
  if (info != 0) throw NumericalError("zgeev failed, info=" + std::to_string(info));
  if (!want_left) out.left.resize(0, 0);
  return out;
}

bool eigen_order(const cplx& a, const cplx& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

double min_eigenvalue_gap(const CVector& ev) {
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    for (Eigen::Index j = i + 1; j < ev.size(); ++j) gap = std::min(gap, std::abs(ev(i) - ev(j)));
  return gap;
}

SpectralDecomposition decompose(const CMatrix& H, const DecomposeOptions& opts) {
  const Eigen::Index n = H.rows();
  if (n != H.cols()) throw ValidationError("decompose needs a square matrix");
  if (n < 2) throw ValidationError("decompose needs dim >= 2");
  if (n > opts.dense_cap)
    throw ValidationError("dimension " + std::to_string(n) + " exceeds the dense eigensolver cap");
  if (!H.allFinite()) throw NumericalError("matrix has non-finite entries");

  const bool real = H.imag().cwiseAbs().maxCoeff() == 0.0;
  RawEigen raw = real ? eig_real(H.real(), opts.left) : eig_complex(H, opts.left);

  if (opts.left) {
    const double gap = min_eigenvalue_gap(raw.values);
    if (gap < opts.collision_guard)
      throw BiorthogonalizationError(
          "eigenvalues closer than " + std::to_string(opts.collision_guard) +
          " (gap " + std::to_string(gap) + "): too close to an exceptional point to pair left "
          "and right eigenvectors");
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return eigen_order(raw.values(a), raw.values(b));
  });

  SpectralDecomposition spec;
  spec.eigenvalues.resize(n);
  spec.right.resize(n, n);
  if (opts.left) spec.left = CMatrix(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[k];
    spec.eigenvalues(k) = raw.values(src);
    spec.right.col(k) = raw.right.col(src).normalized();
    if (opts.left) {
      const CVector l = raw.left.col(src);
      const cplx overlap = l.dot(spec.right.col(k));  // l^H r
      if (std::abs(overlap) == 0.0)
        throw BiorthogonalizationError("left and right eigenvectors are orthogonal");
      spec.left->col(k) = l / std::conj(overlap);
    }
  }
  return spec;
}

SpectralDecomposition decompose(const HamiltonianMatrix& H, const DecomposeOptions& opts) {
  if (H.dim() > opts.dense_cap)
    throw ValidationError("dimension " + std::to_string(H.dim()) +
                          " exceeds the dense eigensolver cap");
  return decompose(H.to_dense(), opts);
}

double SpectralDecomposition::biorthogonality_residual() const {
  if (!left) throw ValidationError("decomposition has no left eigenvectors");
  const CMatrix overlap = left->adjoint() * right;
  return (overlap - CMatrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

double SpectralDecomposition::completeness_residual() const {
  if (!left) throw ValidationError("decomposition has no left eigenvectors");
  const CMatrix resolution = right * left->adjoint();
  return (resolution - CMatrix::Identity(dim(), dim())).norm();
}

double SpectralDecomposition::eigen_residual(const HamiltonianMatrix& H) const {
  double worst = 0.0;
  CVector hr(dim());
  for (Eigen::Index n = 0; n < dim(); ++n) {
    H.apply(right.col(n), hr);
    worst = std::max(worst, (hr - eigenvalues(n) * right.col(n)).norm());
  }
  return worst / H.norm_inf();
}

Eigen::Index SpectralDecomposition::max_imag_index() const {
  Eigen::Index best = 0;
  eigenvalues.imag().maxCoeff(&best);
  return best;
}

// ---------------------------------------------------------------------------

double ipr(const CVector& state) {
  const double norm2 = state.squaredNorm();
  if (!(norm2 > 0.0)) throw ValidationError("IPR of a zero vector");
  return state.cwiseAbs2().cwiseAbs2().sum() / (norm2 * norm2);
}

double mean_ipr(const SpectralDecomposition& spec) {
  double sum = 0.0;
  for (Eigen::Index n = 0; n < spec.dim(); ++n) sum += ipr(spec.right.col(n));
  return sum / static_cast<double>(spec.dim());
}

double imag_fraction(const CVector& eigenvalues, double threshold) {
  if (eigenvalues.size() == 0) return 0.0;
  const auto count = (eigenvalues.imag().cwiseAbs().array() > threshold).count();
  return static_cast<double>(count) / static_cast<double>(eigenvalues.size());
}

RVector density_profile(const CVector& state) {
  const double norm2 = state.squaredNorm();
  if (!(norm2 > 0.0)) throw ValidationError("density of a zero vector");
  return state.cwiseAbs2() / norm2;
}

RVector density_profile(const CVector& state, const FockBasis& basis) {
  if (static_cast<std::size_t>(state.size()) != basis.size())
    throw ValidationError("state does not match the Fock basis");
  const double norm2 = state.squaredNorm();
  if (!(norm2 > 0.0)) throw ValidationError("density of a zero vector");
  RVector n = RVector::Zero(basis.sites());
  for (std::size_t s = 0; s < basis.size(); ++s) {
    const double w = std::norm(state(static_cast<Eigen::Index>(s)));
    for (std::uint64_t word = basis[s]; word; word &= word - 1) n(std::countr_zero(word)) += w;
  }
  return n / norm2;
}

RVector biorthogonal_density(const CVector& right, const CVector& left) {
  const cplx norm = left.dot(right);
  return (left.conjugate().cwiseProduct(right) / norm).real();
}

RVector biorthogonal_density(const CVector& right, const CVector& left, const FockBasis& basis) {
  const cplx norm = left.dot(right);
  RVector n = RVector::Zero(basis.sites());
  for (std::size_t s = 0; s < basis.size(); ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    const double w = (std::conj(left(i)) * right(i) / norm).real();
    for (std::uint64_t word = basis[s]; word; word &= word - 1) n(std::countr_zero(word)) += w;
  }
  return n;
}

RVector mean_density(const SpectralDecomposition& spec, const FockBasis* basis,
                     DensityConvention convention) {
  if (convention == DensityConvention::Biorthogonal && !spec.left)
    throw ValidationError("biorthogonal density needs left eigenvectors");
  const Eigen::Index sites = basis ? basis->sites() : spec.dim();
  RVector acc = RVector::Zero(sites);
  for (Eigen::Index n = 0; n < spec.dim(); ++n) {
    const CVector r = spec.right.col(n);
    if (convention == DensityConvention::RightRight) {
      acc += basis ? density_profile(r, *basis) : density_profile(r);
    } else {
      const CVector l = spec.left->col(n);
      acc += basis ? biorthogonal_density(r, l, *basis) : biorthogonal_density(r, l);
    }
  }
  return acc / static_cast<double>(spec.dim());
}

double cdw_order(const RVector& density) {
  if (density.size() == 0) throw ValidationError("empty density profile");
  double s = 0.0;
  for (Eigen::Index i = 0; i < density.size(); ++i) s += (i % 2 == 0 ? 1.0 : -1.0) * density(i);
  return std::abs(s) / static_cast<double>(density.size());
}

Eigen::Index ground_state_index(const SpectralDecomposition& spec) {
  Eigen::Index best = 0;
  for (Eigen::Index n = 1; n < spec.dim(); ++n)
    if (eigen_order(spec.eigenvalues(n), spec.eigenvalues(best))) best = n;
  return best;
}

}  // namespace hn
