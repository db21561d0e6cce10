#include "hn/model.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <string>

namespace hn {

namespace {

constexpr int kMaxSites = 63;

using BinomialTable = std::array<std::array<std::uint64_t, kMaxSites + 2>, kMaxSites + 2>;

const BinomialTable& binomial_table() {
  static const BinomialTable table = [] {
    BinomialTable t{};
    for (int n = 0; n <= kMaxSites + 1; ++n) {
      t[n][0] = 1;
      for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
    }
    return t;
  }();
  return table;
}

// Next larger word with the same popcount (Gosper's hack).
std::uint64_t next_combination(std::uint64_t x) {
  const std::uint64_t c = x & (~x + 1);
  const std::uint64_t r = x + c;
  return (((r ^ x) >> 2) / c) | r;
}

bool bit(std::uint64_t word, int j) { return (word >> j) & 1u; }

}  // namespace

const char* to_string(Boundary bc) { return bc == Boundary::Open ? "obc" : "pbc"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "obc" || s == "open" || s == "OBC") return Boundary::Open;
  if (s == "pbc" || s == "periodic" || s == "PBC") return Boundary::Periodic;
  throw ValidationError("unknown boundary condition '" + s + "' (expected obc or pbc)");
}

double reduce_flux(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(phi, two_pi);
  if (r < 0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

double ModelParams::effective_flux() const {
  return bc == Boundary::Open ? 0.0 : reduce_flux(phi);
}

void ModelParams::validate() const {
  if (L < 2) throw ValidationError("L must be at least 2, got " + std::to_string(L));
  if (W < 0) throw ValidationError("W must be non-negative");
  if (!std::isfinite(g) || !std::isfinite(V) || !std::isfinite(W) || !std::isfinite(theta) ||
      !std::isfinite(theta0) || !std::isfinite(phi))
    throw ValidationError("model parameters must be finite");
  if (N < 0) throw ValidationError("N must be non-negative");
  if (N > 0) {
    if (N >= L) throw ValidationError("many-body runs need 0 < N < L");
    if (L > kMaxSites) throw ValidationError("many-body runs support at most 63 sites");
  }
}

double potential(const ModelParams& params, int j) {
  if (j < 0 || j >= params.L) throw ValidationError("site index out of range");
  return params.W * std::cos(2.0 * std::numbers::pi * params.theta * j + params.theta0);
}

std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n || n > kMaxSites + 1) return 0;
  return binomial_table()[n][k];
}

std::size_t combination_rank(std::uint64_t word) {
  std::size_t rank = 0;
  int k = 1;
  while (word) {
    const int p = std::countr_zero(word);
    rank += binomial(p, k++);
    word &= word - 1;
  }
  return rank;
}

// ---------------------------------------------------------------------------

FockBasis::FockBasis(int L, int N, std::size_t cap) : L_(L), N_(N) {
  if (L < 2 || L > kMaxSites) throw ValidationError("Fock basis needs 2 <= L <= 63");
  if (N <= 0 || N >= L) throw ValidationError("Fock basis needs 0 < N < L");
  const std::uint64_t dim = binomial(L, N);
  if (dim > cap)
    throw ValidationError("Fock basis dimension " + std::to_string(dim) + " exceeds cap " +
                          std::to_string(cap));
  states_.reserve(dim);
  std::uint64_t word = (std::uint64_t{1} << N) - 1;
  for (std::uint64_t i = 0; i < dim; ++i) {
    states_.push_back(word);
    if (i + 1 < dim) word = next_combination(word);
  }
}

std::size_t FockBasis::index_of(std::uint64_t word) const {
  if (std::popcount(word) != N_ || (word >> L_) != 0)
    throw ValidationError("word is not in this Fock basis");
  return combination_rank(word);
}

FockBasis build_fock_basis(int L, int N, std::size_t cap) { return FockBasis(L, N, cap); }

// ---------------------------------------------------------------------------

HamiltonianMatrix::HamiltonianMatrix(ModelParams params, CMatrix dense)
    : params_(std::move(params)), entries_(std::move(dense)) {}

HamiltonianMatrix::HamiltonianMatrix(ModelParams params, SparseCMatrix sparse)
    : params_(std::move(params)), entries_(std::move(sparse)) {}

Eigen::Index HamiltonianMatrix::dim() const {
  return std::visit([](const auto& m) { return m.rows(); }, entries_);
}

CMatrix HamiltonianMatrix::to_dense() const {
  if (is_dense()) return dense();
  return CMatrix(sparse());
}

void HamiltonianMatrix::apply(const CVector& x, CVector& y) const {
  if (is_dense())
    y.noalias() = dense() * x;
  else
    y.noalias() = sparse() * x;
}

CVector HamiltonianMatrix::apply(const CVector& x) const {
  CVector y(dim());
  apply(x, y);
  return y;
}

double HamiltonianMatrix::norm_inf() const {
  if (is_dense()) return dense().cwiseAbs().rowwise().sum().maxCoeff();
  const auto& m = sparse();
  double best = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    double row = 0.0;
    for (SparseCMatrix::InnerIterator it(m, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

bool HamiltonianMatrix::is_real() const {
  if (is_dense()) return dense().imag().cwiseAbs().maxCoeff() == 0.0;
  const auto& m = sparse();
  for (Eigen::Index k = 0; k < m.nonZeros(); ++k)
    if (m.valuePtr()[k].imag() != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------

namespace {

struct HopAmplitudes {
  cplx toward_lower;  // coefficient of c_j^+ c_{j+1}
  cplx toward_upper;  // coefficient of c_{j+1}^+ c_j
};

// Amplitudes for bond (j, j+1 mod L). Only the wrap bond carries the twist.
HopAmplitudes bond_amplitudes(const ModelParams& p, int j) {
  const double fwd = -std::exp(p.g);
  const double bwd = -std::exp(-p.g);
  if (j < p.L - 1) return {fwd, bwd};
  const cplx twist = std::polar(1.0, p.effective_flux());
  return {fwd * twist, bwd * std::conj(twist)};
}

}  // namespace

HamiltonianMatrix build_single_particle(const ModelParams& params) {
  params.validate();
  const int L = params.L;
  const int bonds = params.bc == Boundary::Periodic ? L : L - 1;

  if (L < kDenseCap) {
    CMatrix h = CMatrix::Zero(L, L);
    for (int j = 0; j < L; ++j) h(j, j) = potential(params, j);
    for (int j = 0; j < bonds; ++j) {
      const int k = (j + 1) % L;
      const auto amp = bond_amplitudes(params, j);
      h(j, k) += amp.toward_lower;
      h(k, j) += amp.toward_upper;
    }
    return {params, std::move(h)};
  }

  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(3 * L);
  for (int j = 0; j < L; ++j) triplets.emplace_back(j, j, potential(params, j));
  for (int j = 0; j < bonds; ++j) {
    const int k = (j + 1) % L;
    const auto amp = bond_amplitudes(params, j);
    triplets.emplace_back(j, k, amp.toward_lower);
    triplets.emplace_back(k, j, amp.toward_upper);
  }
  SparseCMatrix h(L, L);
  h.setFromTriplets(triplets.begin(), triplets.end());
  return {params, std::move(h)};
}

HamiltonianMatrix build_many_body(const ModelParams& params, const FockBasis& basis) {
  params.validate();
  if (basis.sites() != params.L || basis.particles() != params.N)
    throw ValidationError("Fock basis does not match (L, N) of the model");

  const int L = params.L;
  const bool periodic = params.bc == Boundary::Periodic;
  const int bonds = periodic ? L : L - 1;
  const double wrap_sign = (params.fermion_sign && (params.N - 1) % 2 != 0) ? -1.0 : 1.0;

  std::vector<double> onsite(L);
  for (int j = 0; j < L; ++j) onsite[j] = potential(params, j);
  std::vector<HopAmplitudes> amps(bonds);
  for (int j = 0; j < bonds; ++j) {
    amps[j] = bond_amplitudes(params, j);
    if (j == L - 1) {
      amps[j].toward_lower *= wrap_sign;
      amps[j].toward_upper *= wrap_sign;
    }
  }

  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(dim) * (bonds / 2 + 2));

  for (Eigen::Index col = 0; col < dim; ++col) {
    const std::uint64_t s = basis[col];
    double diag = 0.0;
    for (int j = 0; j < L; ++j)
      if (bit(s, j)) diag += onsite[j];
    for (int j = 0; j < bonds; ++j) {
      const int k = (j + 1) % L;
      const bool nj = bit(s, j);
      const bool nk = bit(s, k);
      if (nj && nk) diag += params.V;
      if (nj == nk) continue;
      const std::uint64_t t = s ^ ((std::uint64_t{1} << j) | (std::uint64_t{1} << k));
      const auto row = static_cast<Eigen::Index>(basis.index_of(t));
      // particle k -> j is c_j^+ c_k, particle j -> k is c_k^+ c_j
      triplets.emplace_back(row, col, nk ? amps[j].toward_lower : amps[j].toward_upper);
    }
    if (diag != 0.0) triplets.emplace_back(col, col, diag);
  }

  SparseCMatrix h(dim, dim);
  h.setFromTriplets(triplets.begin(), triplets.end());
  h.makeCompressed();
  return {params, std::move(h)};
}

HamiltonianMatrix build_hamiltonian(const ModelParams& params) {
  if (!params.many_body()) return build_single_particle(params);
  return build_many_body(params, build_fock_basis(params.L, params.N));
}

}  // namespace hn
