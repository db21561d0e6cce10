#pragma once

// Independent reference implementations used by the unit tests.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hn/model.hpp"

namespace oracle {

using hn::cplx;
using hn::CMatrix;
using hn::CVector;

/// Single-particle matrix straight from the bond list.
inline CMatrix single_particle(const hn::ModelParams& p) {
  CMatrix h = CMatrix::Zero(p.L, p.L);
  const double pi = std::acos(-1.0);
  for (int j = 0; j < p.L; ++j) h(j, j) = p.W * std::cos(2 * pi * p.theta * j + p.theta0);
  const int bonds = p.bc == hn::Boundary::Periodic ? p.L : p.L - 1;
  for (int j = 0; j < bonds; ++j) {
    const int k = (j + 1) % p.L;
    cplx to_lower = -std::exp(p.g), to_upper = -std::exp(-p.g);
    if (k == 0) {
      to_lower *= std::polar(1.0, p.bc == hn::Boundary::Periodic ? p.phi : 0.0);
      to_upper *= std::polar(1.0, p.bc == hn::Boundary::Periodic ? -p.phi : 0.0);
    }
    h(j, k) += to_lower;  // c_j^dag c_{j+1}
    h(k, j) += to_upper;  // c_{j+1}^dag c_j
  }
  return h;
}

/// All words with N of L bits set, by brute-force scan.
inline std::vector<std::uint64_t> words(int L, int N) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t w = 0; w < (std::uint64_t{1} << L); ++w)
    if (std::popcount(w) == N) out.push_back(w);
  return out;
}

/// sum_ij h_ij c_i^dag c_j + V sum n_i n_{i+1} applied to every basis word with the
/// Jordan-Wigner sign of ascending site order.
inline CMatrix many_body(const hn::ModelParams& p) {
  const auto basis = words(p.L, p.N);
  const CMatrix h = single_particle(p);
  const auto n = static_cast<Eigen::Index>(basis.size());
  CMatrix H = CMatrix::Zero(n, n);
  auto index = [&](std::uint64_t w) {
    return std::lower_bound(basis.begin(), basis.end(), w) - basis.begin();
  };
  auto occ = [](std::uint64_t w, int j) { return (w >> j) & 1u; };
  for (Eigen::Index col = 0; col < n; ++col) {
    const std::uint64_t s = basis[col];
    for (int i = 0; i < p.L; ++i) {
      H(col, col) += h(i, i) * static_cast<double>(occ(s, i));
      for (int j = 0; j < p.L; ++j) {
        if (i == j || h(i, j) == cplx(0.0) || !occ(s, j) || occ(s, i)) continue;
        // c_j removes a particle passing the ones below j, c_i^dag adds one passing those below i
        const std::uint64_t t = s & ~(std::uint64_t{1} << j);
        const int sign_j = std::popcount(s & ((std::uint64_t{1} << j) - 1)) % 2;
        const int sign_i = std::popcount(t & ((std::uint64_t{1} << i) - 1)) % 2;
        const std::uint64_t u = t | (std::uint64_t{1} << i);
        H(index(u), col) += ((sign_i + sign_j) % 2 ? -1.0 : 1.0) * h(i, j);
      }
    }
    const int bonds = p.bc == hn::Boundary::Periodic ? p.L : p.L - 1;
    for (int j = 0; j < bonds; ++j)
      H(col, col) += p.V * static_cast<double>(occ(s, j) * occ(s, (j + 1) % p.L));
  }
  return H;
}

/// Eigenvalues from Eigen's own complex QR, sorted like the library.
inline CVector eigenvalues(const CMatrix& A) {
  Eigen::ComplexEigenSolver<CMatrix> es(A, false);
  std::vector<cplx> v(es.eigenvalues().data(), es.eigenvalues().data() + A.rows());
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return Eigen::Map<CVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Largest distance from any element of `a` to its nearest element of `b`.
inline double set_distance(const CVector& a, const CVector& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double best = INFINITY;
    for (Eigen::Index j = 0; j < b.size(); ++j) best = std::min(best, std::abs(a(i) - b(j)));
    worst = std::max(worst, best);
  }
  return worst;
}

/// Plane-wave spectrum of the clean ring: -2 cos(k - i g), k = (2 pi m + phi) / L.
inline CVector plane_waves(int L, double g, double phi = 0.0) {
  CVector out(L);
  const double pi = std::acos(-1.0);
  for (int m = 0; m < L; ++m) out(m) = -2.0 * std::cos(cplx((2 * pi * m + phi) / L, -g));
  return out;
}

}  // namespace oracle
