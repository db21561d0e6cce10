#include "hn/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include <json.hpp>

namespace hn {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

void write_spectrum_csv(std::ostream& os, const CVector& ev) {
  os << "index,re,im\n";
  for (Eigen::Index n = 0; n < ev.size(); ++n)
    os << n << ',' << format_number(ev(n).real()) << ',' << format_number(ev(n).imag()) << '\n';
}

void write_spectrum_json(std::ostream& os, const CVector& ev) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index n = 0; n < ev.size(); ++n)
    arr.push_back({{"index", n}, {"re", ev(n).real()}, {"im", ev(n).imag()}});
  os << arr.dump(2) << '\n';
}

void write_record_header(std::ostream& os) { os << kRecordHeader << '\n'; }

void write_record_csv(std::ostream& os, const ResultRecord& r) {
  os << r.L << ',' << r.N << ',' << format_number(r.g) << ',' << format_number(r.V) << ','
     << format_number(r.W) << ',' << (r.theta0 ? format_number(*r.theta0) : std::string()) << ','
     << to_string(r.bc) << ',' << (r.sample < 0 ? std::string("mean") : std::to_string(r.sample))
     << ',' << r.quantity << ',' << (r.index < 0 ? std::string() : std::to_string(r.index)) << ','
     << format_number(r.value) << ',' << csv_field(r.warnings) << '\n';
}

void write_records_json(std::ostream& os, const std::vector<ResultRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j = {{"L", r.L},
                        {"N", r.N},
                        {"g", r.g},
                        {"V", r.V},
                        {"W", r.W},
                        {"bc", to_string(r.bc)},
                        {"quantity", r.quantity},
                        {"warnings", r.warnings}};
    j["theta0"] = r.theta0 ? nlohmann::json(*r.theta0) : nlohmann::json(nullptr);
    j["sample"] = r.sample < 0 ? nlohmann::json("mean") : nlohmann::json(r.sample);
    j["index"] = r.index < 0 ? nlohmann::json(nullptr) : nlohmann::json(r.index);
    j["value"] = std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(nullptr);
    arr.push_back(std::move(j));
  }
  os << arr.dump(2) << '\n';
}

namespace {

std::optional<std::string> row_key(const std::string& line) {
  const auto f = split_csv_line(line);
  if (f.size() < 12) return std::nullopt;
  try {
    return point_key(std::stoi(f[0]), std::stoi(f[1]), std::stod(f[2]), std::stod(f[3]),
                     std::stod(f[4]));
  } catch (const std::exception&) {
    // truncated trailing line of an interrupted run
    return std::nullopt;
  }
}

}  // namespace

std::set<std::string> completed_points(std::istream& in, const std::set<Quantity>& wanted) {
  std::map<std::string, std::set<std::string>> seen;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      if (line.rfind("L,", 0) == 0) continue;
    }
    const auto key = row_key(line);
    if (!key) continue;
    const auto f = split_csv_line(line);
    if (f[7] == "mean") seen[*key].insert(f[8]);
  }
  std::set<std::string> done;
  for (const auto& [key, names] : seen) {
    bool all = true;
    for (Quantity q : wanted) all = all && names.count(to_string(q));
    if (all) done.insert(key);
  }
  return done;
}

std::size_t retain_points(std::istream& in, std::ostream& out, const std::set<std::string>& keep) {
  std::string line;
  std::size_t kept = 0;
  out << kRecordHeader << '\n';
  while (std::getline(in, line)) {
    const auto key = row_key(line);
    if (key && keep.count(*key)) {
      out << line << '\n';
      ++kept;
    }
  }
  return kept;
}

void write_winding_row(std::ostream& os, double W, double g, const WindingResult& w) {
  std::string warnings;
  for (const auto& s : w.warnings) warnings += (warnings.empty() ? "" : "; ") + s;
  os << format_number(W) << ',' << format_number(g) << ',' << w.nu << ',' << format_number(w.raw)
     << ',' << csv_field(warnings) << '\n';
}

void write_series_row(std::ostream& os, const ObservableRecord& r) {
  os << format_number(r.t) << ',' << r.name << ','
     << (r.index < 0 ? std::string() : std::to_string(r.index)) << ',' << format_number(r.value)
     << '\n';
}

void write_heatmap(std::ostream& os, const std::vector<std::pair<double, RVector>>& rows) {
  os << kHeatmapHeader << '\n';
  for (const auto& [t, v] : rows)
    for (Eigen::Index j = 0; j < v.size(); ++j)
      os << format_number(t) << ',' << j << ',' << format_number(v(j)) << '\n';
}

void write_metadata_json(const std::string& path, const std::map<std::string, std::string>& meta) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write metadata file " + path);
  f << nlohmann::json(meta).dump(2) << '\n';
}

}  // namespace hn
