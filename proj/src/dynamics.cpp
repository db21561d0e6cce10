#include "hn/dynamics.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace hn {

const char* to_string(Method m) { return m == Method::Exact ? "exact" : "krylov"; }

Method parse_method(const std::string& s) {
  if (s == "exact") return Method::Exact;
  if (s == "krylov" || s == "arnoldi") return Method::Krylov;
  throw ValidationError("unknown evolution method '" + s + "'");
}

void EvolverConfig::validate() const {
  if (M < 1) throw ValidationError("Krylov dimension M must be at least 1");
  if (!(dt > 0.0)) throw ValidationError("time step dt must be positive");
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ValidationError("t_max must be >= 0");
  if (record_stride < 1) throw ValidationError("record stride must be at least 1");
}

CVector initial_localized(int L, int j0) {
  if (L < 1) throw ValidationError("chain length must be positive");
  if (j0 < 0 || j0 >= L) throw ValidationError("initial site out of range");
  CVector psi = CVector::Zero(L);
  psi(j0) = 1.0;
  return psi;
}

CVector initial_domain_wall(const FockBasis& basis) {
  const int L = basis.sites();
  const int N = basis.particles();
  if (N < 1 || N >= L) throw ValidationError("domain-wall state needs 0 < N < L");
  const std::uint64_t word = ((std::uint64_t{1} << N) - 1) << (L - N);
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(basis.size()));
  psi(static_cast<Eigen::Index>(basis.index_of(word))) = 1.0;
  return psi;
}

CVector evolve_exact(const SpectralDecomposition& spec, const CVector& psi0, double t,
                     bool renormalize) {
  if (!spec.left) throw NumericalError("exact evolution needs a biorthogonalized decomposition");
  if (psi0.size() != spec.dim()) throw ValidationError("state does not match the decomposition");
  if (t == 0.0) return renormalize ? CVector(psi0.normalized()) : psi0;

  CVector c = spec.left->adjoint() * psi0;
  for (Eigen::Index n = 0; n < c.size(); ++n)
    c(n) *= std::exp(cplx(0.0, -t) * spec.eigenvalues(n));
  CVector psi = spec.right * c;
  if (!psi.allFinite()) throw NumericalError("exact evolution overflowed");
  if (renormalize) psi.normalize();
  return psi;
}

CVector small_propagator_first_column(const CMatrix& A, double dt, bool* used_pade) {
  const Eigen::Index m = A.rows();
  const cplx minus_i_dt(0.0, -dt);

  Eigen::ComplexEigenSolver<CMatrix> es(A);
  bool pade = es.info() != Eigen::Success;
  CVector out;
  if (!pade) {
    const CMatrix& S = es.eigenvectors();
    Eigen::JacobiSVD<CMatrix> svd(S);
    const RVector sv = svd.singularValues();
    const double cond = sv(0) / sv(m - 1);
    pade = !(cond < kEigenvectorConditionCap);
    if (!pade) {
      CVector e1 = CVector::Zero(m);
      e1(0) = 1.0;
      CVector c = S.partialPivLu().solve(e1);
      for (Eigen::Index k = 0; k < m; ++k) c(k) *= std::exp(minus_i_dt * es.eigenvalues()(k));
      out = S * c;
    }
  }
  if (pade) {
    const CMatrix expA = (minus_i_dt * A).exp();
    out = expA.col(0);
  }
  if (used_pade) *used_pade = pade;
  return out;
}

CVector arnoldi_step(const HamiltonianMatrix& H, const CVector& psi, int M, double dt,
                     bool renormalize, KrylovInfo* info) {
  if (dt < 0.0) throw ValidationError("Krylov step needs dt >= 0");
  if (M < 1) throw ValidationError("Krylov dimension must be at least 1");
  if (psi.size() != H.dim()) throw ValidationError("state does not match the Hamiltonian");
  const double beta = psi.norm();
  if (!(beta > 0.0) || !std::isfinite(beta)) throw NumericalError("Krylov step on a zero vector");
  if (dt == 0.0) {
    if (info) *info = KrylovInfo{0, false, 1.0, false};
    return psi;
  }

  const Eigen::Index dim = H.dim();
  const int m = static_cast<int>(std::min<Eigen::Index>(M, dim));
  CMatrix V(dim, m);
  CMatrix hess = CMatrix::Zero(m + 1, m);
  V.col(0) = psi / beta;

  CVector w(dim);
  int used = m;
  bool invariant = false;
  for (int j = 0; j < m; ++j) {
    H.apply(V.col(j), w);
    // classical Gram-Schmidt, applied twice
    CVector h = V.leftCols(j + 1).adjoint() * w;
    w.noalias() -= V.leftCols(j + 1) * h;
    const CVector h2 = V.leftCols(j + 1).adjoint() * w;
    w.noalias() -= V.leftCols(j + 1) * h2;
    h += h2;
    hess.col(j).head(j + 1) = h;
    const double residual = w.norm();
    if (!std::isfinite(residual) || !h.allFinite())
      throw NumericalError("Arnoldi breakdown: non-finite entries");
    hess(j + 1, j) = residual;
    if (j + 1 == m) break;
    if (residual < kArnoldiBreakdown) {
      used = j + 1;
      invariant = true;
      break;
    }
    V.col(j + 1) = w / residual;
  }

  bool pade = false;
  const CVector y = small_propagator_first_column(hess.topLeftCorner(used, used), dt, &pade);
  CVector out = beta * (V.leftCols(used) * y);
  if (!out.allFinite()) throw NumericalError("Krylov step produced non-finite amplitudes");
  const double out_norm = out.norm();
  if (info) *info = KrylovInfo{used, invariant, out_norm / beta, pade};
  if (renormalize) out /= out_norm;
  return out;
}

// ---------------------------------------------------------------------------

RVector schmidt_values(const CVector& psi, const FockBasis& basis, int cut) {
  const int L = basis.sites();
  const int N = basis.particles();
  if (cut < 1 || cut >= L) throw ValidationError("entanglement cut must satisfy 0 < cut < L");
  if (static_cast<std::size_t>(psi.size()) != basis.size())
    throw ValidationError("state does not match the Fock basis");

  // Blocks labelled by the particle count left of the cut.
  const int right_sites = L - cut;
  const int lo = std::max(0, N - right_sites);
  const int hi = std::min(N, cut);
  std::vector<CMatrix> blocks;
  blocks.reserve(hi - lo + 1);
  for (int nl = lo; nl <= hi; ++nl)
    blocks.emplace_back(CMatrix::Zero(static_cast<Eigen::Index>(binomial(cut, nl)),
                                      static_cast<Eigen::Index>(binomial(right_sites, N - nl))));

  const std::uint64_t left_mask = (std::uint64_t{1} << cut) - 1;
  for (std::size_t s = 0; s < basis.size(); ++s) {
    const std::uint64_t word = basis[s];
    const std::uint64_t left = word & left_mask;
    const std::uint64_t right = word >> cut;
    const int nl = std::popcount(left);
    blocks[nl - lo](static_cast<Eigen::Index>(combination_rank(left)),
                    static_cast<Eigen::Index>(combination_rank(right))) =
        psi(static_cast<Eigen::Index>(s));
  }

  std::vector<double> values;
  for (const auto& b : blocks) {
    const RVector sv = Eigen::JacobiSVD<CMatrix>(b).singularValues();
    values.insert(values.end(), sv.data(), sv.data() + sv.size());
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  return Eigen::Map<RVector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

double entanglement_entropy(const CVector& psi, const FockBasis& basis, int cut) {
  if (cut < 0) cut = basis.sites() / 2;
  if (std::abs(psi.squaredNorm() - 1.0) > 1e-8)
    throw ValidationError("entanglement entropy needs a normalized state");
  const RVector s = schmidt_values(psi, basis, cut);
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double p = s(i) * s(i);
    if (p < 1e-16) continue;
    entropy -= p * std::log(p);
  }
  return entropy;
}

// ---------------------------------------------------------------------------

const char* to_string(Observable o) {
  switch (o) {
    case Observable::Density: return "density";
    case Observable::Entanglement: return "entropy";
    case Observable::FockIpr: return "fock_ipr";
    case Observable::Ipr: return "ipr";
    case Observable::MaxImagOverlap: return "rmax_overlap";
    case Observable::Norm: return "norm";
  }
  return "?";
}

Observable parse_observable(const std::string& s) {
  for (auto o : {Observable::Density, Observable::Entanglement, Observable::FockIpr,
                 Observable::Ipr, Observable::MaxImagOverlap, Observable::Norm})
    if (s == to_string(o)) return o;
  if (s == "see" || s == "S_EE") return Observable::Entanglement;
  throw ValidationError("unknown observable '" + s + "'");
}

void ObservableSeries::add(double t, std::string name, int index, double value) {
  records_.push_back({t, std::move(name), index, value});
  if (sink_) sink_(records_.back());
}

std::vector<std::pair<double, double>> ObservableSeries::scalar(const std::string& name) const {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : records_)
    if (r.name == name) out.emplace_back(r.t, r.value);
  return out;
}

std::vector<std::pair<double, RVector>> ObservableSeries::profile(const std::string& name) const {
  std::vector<std::pair<double, RVector>> out;
  std::vector<double> current;
  double t = 0.0;
  auto flush = [&] {
    if (!current.empty())
      out.emplace_back(t, Eigen::Map<RVector>(current.data(), static_cast<Eigen::Index>(current.size())));
    current.clear();
  };
  for (const auto& r : records_) {
    if (r.name != name) continue;
    if (r.index == 0) {
      flush();
      t = r.t;
    }
    current.push_back(r.value);
  }
  flush();
  return out;
}

double participation_width(const RVector& density) {
  const double total = density.sum();
  const double sq = density.squaredNorm();
  if (!(sq > 0.0)) throw ValidationError("participation width of an empty profile");
  return total * total / sq;
}

namespace {

std::string describe(const ModelParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "L=" << p.L << " N=" << p.N << " g=" << p.g << " V=" << p.V << " W=" << p.W
     << " theta=" << p.theta << " theta0=" << p.theta0 << " bc=" << to_string(p.bc)
     << " phi=" << p.effective_flux();
  return os.str();
}

}  // namespace

ObservableSeries run(const ModelParams& params, const EvolverConfig& cfg, const CVector& initial,
                     const std::set<Observable>& observables, ObservableSeries::Sink sink) {
  params.validate();
  cfg.validate();

  std::optional<FockBasis> basis;
  if (params.many_body()) basis.emplace(params.L, params.N);
  const HamiltonianMatrix H =
      basis ? build_many_body(params, *basis) : build_single_particle(params);
  if (initial.size() != H.dim()) throw ValidationError("initial state has the wrong dimension");
  if (!basis && (observables.count(Observable::Entanglement) || observables.count(Observable::FockIpr)))
    throw ValidationError("entropy and fock_ipr need a many-body run (N > 0)");

  std::optional<SpectralDecomposition> spec;
  const bool want_overlap = observables.count(Observable::MaxImagOverlap) > 0;
  if (cfg.method == Method::Exact || want_overlap)
    spec = decompose(H, DecomposeOptions{.left = cfg.method == Method::Exact});
  CVector rmax;
  if (want_overlap) rmax = spec->right.col(spec->max_imag_index());

  ObservableSeries series(std::move(sink));
  auto& meta = series.metadata();
  meta["params"] = describe(params);
  meta["method"] = to_string(cfg.method);
  meta["M"] = std::to_string(cfg.M);
  meta["dt"] = std::to_string(cfg.dt);
  meta["t_max"] = std::to_string(cfg.t_max);
  meta["renormalize"] = cfg.renormalize ? "true" : "false";

  auto record = [&](double t, const CVector& psi) {
    const double norm = psi.norm();
    for (Observable o : observables) {
      switch (o) {
        case Observable::Density: {
          const RVector n = basis ? density_profile(psi, *basis) : density_profile(psi);
          for (Eigen::Index j = 0; j < n.size(); ++j)
            series.add(t, "density", static_cast<int>(j), n(j));
          break;
        }
        case Observable::Entanglement:
          series.add(t, "entropy", -1, entanglement_entropy(psi / norm, *basis));
          break;
        case Observable::FockIpr:
          series.add(t, "fock_ipr", -1, fock_ipr(psi));
          break;
        case Observable::Ipr:
          series.add(t, "ipr", -1, ipr(psi));
          break;
        case Observable::MaxImagOverlap:
          series.add(t, "rmax_overlap", -1, std::abs(rmax.dot(psi)) / norm);
          break;
        case Observable::Norm:
          series.add(t, "norm", -1, norm);
          break;
      }
    }
  };

  const long steps = std::lround(cfg.t_max / cfg.dt);
  CVector psi = cfg.renormalize ? CVector(initial.normalized()) : initial;
  record(0.0, psi);
  for (long k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    if (cfg.method == Method::Exact)
      psi = evolve_exact(*spec, initial, t, cfg.renormalize);
    else
      psi = arnoldi_step(H, psi, cfg.M, cfg.dt, cfg.renormalize);
    if (k % cfg.record_stride == 0 || k == steps) record(t, psi);
  }
  return series;
}

double rms_width(const RVector& density) {
  const double total = density.sum();
  if (!(total > 0.0)) throw ValidationError("rms width of an empty profile");
  const RVector j = RVector::LinSpaced(density.size(), 0.0, static_cast<double>(density.size() - 1));
  const double mean = density.dot(j) / total;
  return std::sqrt(density.dot((j.array() - mean).square().matrix()) / total);
}

}  // namespace hn
