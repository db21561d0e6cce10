#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hn/model.hpp"
#include "hn/topology.hpp"

namespace hn {

enum class Quantity { IprObc, IprPbc, FIm, Winding, FockIpr, ODw, Density };

const char* to_string(Quantity q);
Quantity parse_quantity(const std::string& s);
std::set<Quantity> parse_quantities(const std::string& comma_list);

/// Inclusive range start, start + step, ..., <= stop. A single value has step 0.
struct GridRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  static GridRange single(double v) { return {v, v, 0.0}; }
  /// "a", or "a:b:step".
  static GridRange parse(const std::string& s);

  std::vector<double> values() const;
};

struct SweepSpec {
  ModelParams base;
  GridRange w_grid = GridRange::single(0.0);
  GridRange g_grid = GridRange::single(0.0);
  GridRange v_grid = GridRange::single(0.0);
  /// theta0 = 2 pi s / S unless `seed` requests uniform random draws.
  int theta0_samples = 1;
  std::optional<std::uint64_t> seed;
  std::set<Quantity> quantities;
  WindingConfig winding;
  /// Many-body winding with E0 at the OBC ground-state energy of each point.
  bool e0_at_ground_state = false;
  int threads = 1;

  void validate() const;
  std::vector<double> theta0_values() const;
};

/// One value of one quantity at one parameter point. sample == -1 marks the
/// theta0 average (theta0 is then empty).
struct ResultRecord {
  int L = 0;
  int N = 0;
  double g = 0.0;
  double V = 0.0;
  double W = 0.0;
  std::optional<double> theta0;
  Boundary bc = Boundary::Open;
  int sample = -1;
  std::string quantity;
  /// Site for per-site quantities, -1 for scalars.
  int index = -1;
  double value = 0.0;
  std::string warnings;
};

struct GridPoint {
  double g = 0.0;
  double V = 0.0;
  double W = 0.0;
};

/// Grid in emission order: g outermost, then V, then W.
std::vector<GridPoint> grid_points(const SweepSpec& spec);

/// Identity of a grid point used for resume bookkeeping.
std::string point_key(int L, int N, double g, double V, double W);

/// All requested quantities at one (grid point, theta0 sample). Numerical failures of
/// individual quantities become NaN values with a warning.
std::vector<ResultRecord> evaluate_sample(const SweepSpec& spec, const GridPoint& point,
                                          int sample, double theta0);

/// Arithmetic mean of the per-sample records of one grid point (NaNs skipped).
std::vector<ResultRecord> aggregate(const std::vector<ResultRecord>& samples, int n_samples);

using RecordSink = std::function<void(const ResultRecord&)>;

/// Evaluates the grid on spec.threads workers. Records reach `sink` from a single
/// thread in grid order: the samples of a point, then its averages. Points whose key
/// is in `completed` are skipped.
void run_sweep(const SweepSpec& spec, const RecordSink& sink,
               const std::set<std::string>& completed = {});

std::vector<ResultRecord> run_sweep(const SweepSpec& spec);

// ---------------------------------------------------------------------------
// Flat key=value configuration
// ---------------------------------------------------------------------------

using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(std::istream& in);
std::string to_config(const ModelParams& p);
/// Overrides fields of `base` present in the map; unknown keys are rejected.
ModelParams params_from_config(const ConfigMap& cfg, ModelParams base = {});

}  // namespace hn
