#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "hn/spectral.hpp"
#include "oracles.hpp"

using namespace hn;

namespace {

ModelParams chain(int L, double g, double W, Boundary bc = Boundary::Open) {
  ModelParams p;
  p.L = L;
  p.g = g;
  p.W = W;
  p.bc = bc;
  return p;
}

ModelParams half_filled(int L, double g, double V, double W, Boundary bc) {
  ModelParams p = chain(L, g, W, bc);
  p.V = V;
  p.N = L / 2;
  return p;
}

}  // namespace

TEST_CASE("two-site chain has eigenvalues -1 and 1") {
  const auto s = decompose(build_single_particle(chain(2, 1.0, 0.0)));
  CHECK(s.eigenvalues(0) == cplx(-1.0));
  CHECK(std::abs(s.eigenvalues(1) - cplx(1.0)) < 1e-15);
  CHECK(s.biorthogonality_residual() < 1e-14);
}

TEST_CASE("clean ring traces the ellipse") {
  const auto s = decompose(build_single_particle(chain(34, 0.5, 0.0, Boundary::Periodic)));
  CHECK(oracle::set_distance(s.eigenvalues, oracle::plane_waves(34, 0.5)) < 1e-12);
  CHECK(s.eigenvalues.real().cwiseAbs().maxCoeff() == doctest::Approx(2 * std::cosh(0.5)));
  // 34 is not a multiple of 4, so the ends of the imaginary axis are only approached
  const double im = s.eigenvalues.imag().cwiseAbs().maxCoeff();
  CHECK(im <= 2 * std::sinh(0.5) + 1e-12);
  CHECK(im > 0.99 * 2 * std::sinh(0.5));
}

TEST_CASE("eigenvalues agree with an independent solver and are sorted") {
  ModelParams p = chain(40, 0.35, 1.7, Boundary::Periodic);
  p.phi = 0.4;
  const auto h = build_single_particle(p);
  const auto s = decompose(h);
  const CVector ref = oracle::eigenvalues(h.to_dense());
  CHECK((s.eigenvalues - ref).cwiseAbs().maxCoeff() < 1e-11);
  for (Eigen::Index n = 1; n < s.dim(); ++n) {
    const cplx a = s.eigenvalues(n - 1), b = s.eigenvalues(n);
    CHECK((a.real() < b.real() || (a.real() == b.real() && a.imag() <= b.imag())));
  }
  CHECK(s.eigen_residual(h) < 1e-13);
  for (Eigen::Index n = 0; n < s.dim(); ++n) CHECK(s.right.col(n).norm() == doctest::Approx(1.0));
}

TEST_CASE("biorthogonality and completeness") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ug(0.0, 1.0), uw(0.0, 8.0);
  for (int i = 0; i < 8; ++i) {
    const auto s = decompose(build_single_particle(chain(34, ug(rng), uw(rng), Boundary::Periodic)));
    CHECK(s.biorthogonality_residual() < 1e-8);
    CHECK(s.completeness_residual() < 1e-8);
  }
  const auto s = decompose(build_single_particle(chain(12, 0.5, 1.0)));
  CHECK(s.biorthogonality_residual() < 1e-8);
  CHECK(s.completeness_residual() < 1e-8);
  const auto mb = decompose(build_many_body(half_filled(8, 0.5, 2.0, 1.0, Boundary::Periodic),
                                            FockBasis(8, 4)));
  CHECK(mb.biorthogonality_residual() < 1e-8);
  CHECK(mb.completeness_residual() < 1e-8);
}

TEST_CASE("left vectors are eigenvectors of the adjoint") {
  const auto h = build_single_particle(chain(20, 0.7, 2.0, Boundary::Periodic));
  const auto s = decompose(h);
  const CMatrix H = h.to_dense();
  for (Eigen::Index n = 0; n < s.dim(); ++n) {
    const CVector l = s.left->col(n);
    CHECK((H.adjoint() * l - std::conj(s.eigenvalues(n)) * l).norm() < 1e-10 * l.norm());
  }
}

TEST_CASE("degenerate spectra refuse biorthogonal pairing") {
  const CMatrix I = CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(decompose(I), BiorthogonalizationError);
  const auto s = decompose(I, DecomposeOptions{.left = false});
  CHECK(s.eigenvalues.isApprox(CVector::Ones(3)));
  CHECK_FALSE(s.biorthogonal());
}

TEST_CASE("open-chain eigenstates follow the similarity transform") {
  // H_g = S H_0 S^-1 with S = diag(e^{-g j}), so r_n = S u_n for the Hermitian u_n.
  const double g = 1.0;
  ModelParams p = chain(55, g, 0.5);
  p.theta0 = 0.3;
  const auto s = decompose(build_single_particle(p));
  ModelParams h0 = p;
  h0.g = 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_single_particle(h0).to_dense().real());
  REQUIRE(s.eigenvalues.imag().cwiseAbs().maxCoeff() < 1e-10);
  CHECK((s.eigenvalues.real() - es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
  for (Eigen::Index n = 0; n < 55; ++n) {
    RVector r = es.eigenvectors().col(n);
    for (int j = 0; j < 55; ++j) r(j) *= std::exp(-g * j);
    CHECK(ipr(s.right.col(n)) == doctest::Approx(ipr(CVector(r.cast<cplx>()))).epsilon(1e-8));
  }
  CHECK(ipr(s.right.col(0)) > 0.3);
}

TEST_CASE("ipr") {
  CVector delta = CVector::Zero(5);
  delta(0) = 1.0;
  CHECK(ipr(delta) == 1.0);
  CHECK(ipr(CVector::Ones(7)) == doctest::Approx(1.0 / 7));
  CHECK_THROWS(ipr(CVector::Zero(3)));
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 50; ++i) {
    CVector v(11);
    for (auto& x : v) x = cplx(nd(rng), nd(rng));
    const double q = ipr(v);
    CHECK(q >= 1.0 / 11 - 1e-15);
    CHECK(q <= 1.0 + 1e-15);
  }
  CHECK(fock_ipr(CVector::Ones(6) / std::sqrt(6.0)) == doctest::Approx(1.0 / 6));
}

TEST_CASE("imaginary fraction") {
  for (double W : {0.0, 1.0, 5.0}) {
    const auto s = decompose(build_single_particle(chain(34, 0.0, W, Boundary::Periodic)),
                             DecomposeOptions{.left = false});
    CHECK(imag_fraction(s) == 0.0);
  }
  const auto weak = decompose(build_single_particle(chain(89, 0.5, 0.1, Boundary::Periodic)));
  CHECK(imag_fraction(weak) > 0.9);
  const auto strong = decompose(build_single_particle(chain(89, 0.5, 6.0, Boundary::Periodic)));
  CHECK(imag_fraction(strong) == 0.0);
  const double wc = critical_disorder(0.5);
  const auto a = decompose(build_single_particle(chain(89, 0.5, 0.1 * wc, Boundary::Periodic)));
  const auto b = decompose(build_single_particle(chain(89, 0.5, 1.5 * wc, Boundary::Periodic)));
  CHECK(imag_fraction(a) >= imag_fraction(b));
  CVector ev(4);
  ev << cplx(1, 0), cplx(1, 1e-14), cplx(1, -2e-13), cplx(0, 1);
  CHECK(imag_fraction(ev) == 0.5);
  CHECK(imag_fraction(ev, 1e-15) == 0.75);
}

TEST_CASE("density profiles") {
  const FockBasis b(8, 4);
  CVector dw = CVector::Zero(static_cast<Eigen::Index>(b.size()));
  dw(static_cast<Eigen::Index>(b.index_of(0b11110000))) = 1.0;
  const RVector n = density_profile(dw, b);
  for (int j = 0; j < 8; ++j) CHECK(n(j) == (j < 4 ? 0.0 : 1.0));
  const RVector u = density_profile(CVector::Ones(9) / 3.0);
  for (int j = 0; j < 9; ++j) CHECK(u(j) == doctest::Approx(1.0 / 9));

  const auto s = decompose(build_many_body(half_filled(8, 0.5, 2.0, 0.0, Boundary::Open), b));
  const RVector avg = mean_density(s, &b);
  CHECK(avg.sum() == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(avg.head(4).sum() > avg.tail(4).sum());
  const RVector bi = mean_density(s, &b, DensityConvention::Biorthogonal);
  CHECK(bi.sum() == doctest::Approx(4.0).epsilon(1e-10));
  for (Eigen::Index k = 0; k < s.dim(); ++k)
    CHECK(density_profile(s.right.col(k), b).sum() == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("biorthogonal density of the clean ring is uniform") {
  const auto s = decompose(build_single_particle(chain(10, 0.4, 0.0, Boundary::Periodic)));
  const RVector n = biorthogonal_density(s.right.col(3), s.left->col(3));
  for (int j = 0; j < 10; ++j) CHECK(n(j) == doctest::Approx(0.1));
}

TEST_CASE("charge-density-wave order") {
  RVector cdw(6);
  cdw << 1, 0, 1, 0, 1, 0;
  CHECK(cdw_order(cdw) == 0.5);
  CHECK(cdw_order(RVector::Constant(6, 0.5)) == 0.0);

  const FockBasis b(12, 6);
  auto odw = [&](double V) {
    const auto s = decompose(build_many_body(half_filled(12, 0.5, V, 0.0, Boundary::Open), b),
                             DecomposeOptions{.left = false});
    CHECK(s.eigenvalues.imag().cwiseAbs().maxCoeff() < 1e-8);
    return cdw_order(density_profile(s.right.col(ground_state_index(s)), b));
  };
  const double weak = odw(1.0), strong = odw(4.0);
  CHECK(weak < 0.1);
  CHECK(strong > 2 * weak);
}
