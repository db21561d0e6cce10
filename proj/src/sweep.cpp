#include "hn/sweep.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <istream>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "hn/output.hpp"
#include "hn/spectral.hpp"

namespace hn {

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::IprObc: return "ipr_obc";
    case Quantity::IprPbc: return "ipr_pbc";
    case Quantity::FIm: return "f_im";
    case Quantity::Winding: return "winding";
    case Quantity::FockIpr: return "fock_ipr";
    case Quantity::ODw: return "o_dw";
    case Quantity::Density: return "density";
  }
  return "?";
}

Quantity parse_quantity(const std::string& s) {
  for (auto q : {Quantity::IprObc, Quantity::IprPbc, Quantity::FIm, Quantity::Winding,
                 Quantity::FockIpr, Quantity::ODw, Quantity::Density})
    if (s == to_string(q)) return q;
  throw ValidationError("unknown quantity '" + s + "'");
}

std::set<Quantity> parse_quantities(const std::string& list) {
  std::set<Quantity> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(parse_quantity(item));
  return out;
}

GridRange GridRange::parse(const std::string& s) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string item;
  try {
    while (std::getline(ss, item, ':')) {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    }
  } catch (const std::exception&) {
    throw ValidationError("cannot parse range '" + s + "' (expected v or start:stop:step)");
  }
  if (parts.size() == 1) return single(parts[0]);
  if (parts.size() != 3) throw ValidationError("range '" + s + "' needs start:stop:step");
  if (!(parts[2] > 0.0) || parts[1] < parts[0])
    throw ValidationError("range '" + s + "' needs stop >= start and step > 0");
  return {parts[0], parts[1], parts[2]};
}

std::vector<double> GridRange::values() const {
  if (step <= 0.0 || stop <= start) return {start};
  std::vector<double> out;
  const double tol = 1e-9 * step;
  for (long i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > stop + tol) break;
    out.push_back(v);
  }
  return out;
}

void SweepSpec::validate() const {
  base.validate();
  winding.validate();
  if (theta0_samples < 1) throw ValidationError("need at least one theta0 sample");
  if (threads < 1) throw ValidationError("need at least one thread");
  if (quantities.empty()) throw ValidationError("no quantities requested");
  const bool mb = base.many_body();
  for (Quantity q : quantities)
    if ((q == Quantity::FockIpr || q == Quantity::ODw) && !mb)
      throw ValidationError(std::string(to_string(q)) + " needs a many-body sweep (N > 0)");
  if (e0_at_ground_state && !mb)
    throw ValidationError("ground-state base energy is defined for many-body sweeps only");
  for (const auto* r : {&w_grid, &g_grid, &v_grid})
    if (r->values().empty()) throw ValidationError("empty parameter grid");
}

std::vector<double> SweepSpec::theta0_values() const {
  std::vector<double> out(theta0_samples);
  if (seed) {
    std::mt19937_64 rng(*seed);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    for (auto& v : out) v = uni(rng);
  } else {
    for (int s = 0; s < theta0_samples; ++s)
      out[s] = 2.0 * std::numbers::pi * s / theta0_samples;
  }
  return out;
}

std::vector<GridPoint> grid_points(const SweepSpec& spec) {
  std::vector<GridPoint> out;
  for (double g : spec.g_grid.values())
    for (double V : spec.v_grid.values())
      for (double W : spec.w_grid.values()) out.push_back({g, V, W});
  return out;
}

std::string point_key(int L, int N, double g, double V, double W) {
  return std::to_string(L) + "|" + std::to_string(N) + "|" + format_number(g) + "|" +
         format_number(V) + "|" + format_number(W);
}

// ---------------------------------------------------------------------------

namespace {

// Decompositions of one sample, computed lazily per boundary condition.
class SampleCache {
 public:
  SampleCache(const ModelParams& params) : params_(params) {
    if (params.many_body()) basis_.emplace(params.L, params.N);
  }

  const FockBasis* basis() const { return basis_ ? &*basis_ : nullptr; }

  const SpectralDecomposition& get(Boundary bc) {
    auto& slot = bc == Boundary::Open ? open_ : periodic_;
    if (!slot) {
      ModelParams p = params_;
      p.bc = bc;
      const HamiltonianMatrix h = basis_ ? build_many_body(p, *basis_) : build_single_particle(p);
      slot = decompose(h, DecomposeOptions{.left = false});
    }
    return *slot;
  }

 private:
  ModelParams params_;
  std::optional<FockBasis> basis_;
  std::optional<SpectralDecomposition> open_, periodic_;
};

}  // namespace

std::vector<ResultRecord> evaluate_sample(const SweepSpec& spec, const GridPoint& point,
                                          int sample, double theta0) {
  ModelParams p = spec.base;
  p.g = point.g;
  p.V = point.V;
  p.W = point.W;
  p.theta0 = theta0;
  p.validate();
  SampleCache cache(p);

  std::vector<ResultRecord> out;
  auto emit = [&](Quantity q, Boundary bc, int index, double value, std::string warnings = {}) {
    ResultRecord r;
    r.L = p.L;
    r.N = p.N;
    r.g = p.g;
    r.V = p.V;
    r.W = p.W;
    r.theta0 = theta0;
    r.bc = bc;
    r.sample = sample;
    r.quantity = to_string(q);
    r.index = index;
    r.value = value;
    r.warnings = std::move(warnings);
    out.push_back(std::move(r));
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (Quantity q : spec.quantities) {
    try {
      switch (q) {
        case Quantity::IprObc:
          emit(q, Boundary::Open, -1, mean_ipr(cache.get(Boundary::Open)));
          break;
        case Quantity::IprPbc:
          emit(q, Boundary::Periodic, -1, mean_ipr(cache.get(Boundary::Periodic)));
          break;
        case Quantity::FIm:
          emit(q, p.bc, -1, imag_fraction(cache.get(p.bc)));
          break;
        case Quantity::FockIpr:
          emit(q, p.bc, -1, mean_ipr(cache.get(p.bc)));
          break;
        case Quantity::ODw: {
          const auto& s = cache.get(p.bc);
          const CVector gs = s.right.col(ground_state_index(s));
          emit(q, p.bc, -1, cdw_order(density_profile(gs, *cache.basis())));
          break;
        }
        case Quantity::Density: {
          const RVector n = mean_density(cache.get(p.bc), cache.basis());
          for (Eigen::Index j = 0; j < n.size(); ++j) emit(q, p.bc, static_cast<int>(j), n(j));
          break;
        }
        case Quantity::Winding: {
          WindingConfig cfg = spec.winding;
          std::string note;
          if (spec.e0_at_ground_state) {
            const auto& s = cache.get(Boundary::Open);
            cfg.e0 = s.eigenvalues(ground_state_index(s)).real();
            note = "e0=" + format_number(cfg.e0.real()) + " (OBC ground state)";
          }
          ModelParams wp = p;
          wp.bc = Boundary::Periodic;
          const WindingResult w = winding_number(wp, cfg);
          for (const auto& s : w.warnings) note += (note.empty() ? "" : "; ") + s;
          emit(q, Boundary::Periodic, -1, static_cast<double>(w.nu), note);
          break;
        }
      }
    } catch (const NumericalError& e) {
      const Boundary bc = q == Quantity::IprObc    ? Boundary::Open
                          : (q == Quantity::IprPbc || q == Quantity::Winding) ? Boundary::Periodic
                                                                              : p.bc;
      emit(q, bc, -1, nan, e.what());
    }
  }
  return out;
}

std::vector<ResultRecord> aggregate(const std::vector<ResultRecord>& samples, int n_samples) {
  std::vector<ResultRecord> out;
  // keyed by (quantity, index) in first-seen order
  std::map<std::pair<std::string, int>, std::size_t> slot;
  std::vector<int> counts;
  std::vector<int> failures;
  for (const auto& r : samples) {
    const auto key = std::make_pair(r.quantity, r.index);
    auto it = slot.find(key);
    if (it == slot.end()) {
      ResultRecord m = r;
      m.sample = -1;
      m.theta0.reset();
      m.value = 0.0;
      m.warnings.clear();
      it = slot.emplace(key, out.size()).first;
      out.push_back(std::move(m));
      counts.push_back(0);
      failures.push_back(0);
    }
    const std::size_t i = it->second;
    if (std::isfinite(r.value)) {
      out[i].value += r.value;
      ++counts[i];
    } else {
      ++failures[i];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].value = counts[i] > 0 ? out[i].value / counts[i]
                                 : std::numeric_limits<double>::quiet_NaN();
    if (failures[i] > 0)
      out[i].warnings = std::to_string(failures[i]) + " of " + std::to_string(n_samples) +
                        " samples failed";
  }
  return out;
}

void run_sweep(const SweepSpec& spec, const RecordSink& sink,
               const std::set<std::string>& completed) {
  spec.validate();
  std::vector<GridPoint> points;
  for (const auto& pt : grid_points(spec))
    if (!completed.count(point_key(spec.base.L, spec.base.N, pt.g, pt.V, pt.W)))
      points.push_back(pt);
  const std::vector<double> thetas = spec.theta0_values();
  const std::size_t S = thetas.size();
  const std::size_t n_tasks = points.size() * S;

  std::vector<std::optional<std::vector<ResultRecord>>> results(n_tasks);
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      std::vector<ResultRecord> recs;
      try {
        recs = evaluate_sample(spec, points[task / S], static_cast<int>(task % S), thetas[task % S]);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = n_tasks;
      }
      {
        std::lock_guard lock(mu);
        results[task] = std::move(recs);
      }
      ready.notify_all();
    }
  };

  // The calling thread is the single writer; with one thread it also does the work.
  std::vector<std::jthread> pool;
  const int n_workers = spec.threads > 1 ? spec.threads : 0;
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);

  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    std::vector<ResultRecord> point_records;
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t task = pi * S + s;
      if (n_workers == 0) {
        results[task] = evaluate_sample(spec, points[pi], static_cast<int>(s), thetas[s]);
      } else {
        std::unique_lock lock(mu);
        ready.wait(lock, [&] { return results[task].has_value() || failure; });
        if (failure) break;
      }
      auto& recs = *results[task];
      for (const auto& r : recs) sink(r);
      point_records.insert(point_records.end(), std::make_move_iterator(recs.begin()),
                           std::make_move_iterator(recs.end()));
      results[task].reset();
    }
    if (failure) break;
    for (const auto& r : aggregate(point_records, static_cast<int>(S))) sink(r);
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

std::vector<ResultRecord> run_sweep(const SweepSpec& spec) {
  std::vector<ResultRecord> out;
  run_sweep(spec, [&](const ResultRecord& r) { out.push_back(r); });
  return out;
}

// ---------------------------------------------------------------------------

ConfigMap parse_config(std::istream& in) {
  ConfigMap out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + " is not key=value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::string to_config(const ModelParams& p) {
  std::ostringstream os;
  os << "L=" << p.L << '\n'
     << "N=" << p.N << '\n'
     << "g=" << format_number(p.g) << '\n'
     << "V=" << format_number(p.V) << '\n'
     << "W=" << format_number(p.W) << '\n'
     << "theta=" << format_number(p.theta) << '\n'
     << "theta0=" << format_number(p.theta0) << '\n'
     << "bc=" << to_string(p.bc) << '\n'
     << "flux=" << format_number(p.phi) << '\n'
     << "fermion-sign=" << (p.fermion_sign ? "true" : "false") << '\n';
  return os.str();
}

ModelParams params_from_config(const ConfigMap& cfg, ModelParams p) {
  for (const auto& [key, value] : cfg) {
    try {
      if (key == "L") p.L = std::stoi(value);
      else if (key == "N") p.N = std::stoi(value);
      else if (key == "g") p.g = std::stod(value);
      else if (key == "V") p.V = std::stod(value);
      else if (key == "W") p.W = std::stod(value);
      else if (key == "theta") p.theta = std::stod(value);
      else if (key == "theta0") p.theta0 = std::stod(value);
      else if (key == "bc") p.bc = parse_boundary(value);
      else if (key == "flux") p.phi = std::stod(value);
      else if (key == "fermion-sign") p.fermion_sign = value == "true" || value == "1";
      else throw ValidationError("unknown model key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ValidationError("bad value '" + value + "' for key '" + key + "'");
    } catch (const std::out_of_range&) {
      throw ValidationError("value out of range for key '" + key + "'");
    }
  }
  return p;
}

}  // namespace hn
