#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hn/output.hpp"
#include "hn/spectral.hpp"
#include "hn/sweep.hpp"

using namespace hn;

namespace {

SweepSpec small_spec() {
  SweepSpec spec;
  spec.base.L = 21;
  spec.base.bc = Boundary::Periodic;
  spec.g_grid = GridRange::parse("0:0.5:0.25");
  spec.w_grid = GridRange::parse("0.5:4.5:2");
  spec.theta0_samples = 3;
  spec.quantities = {Quantity::IprObc, Quantity::IprPbc, Quantity::FIm, Quantity::Winding};
  return spec;
}

const ResultRecord* find(const std::vector<ResultRecord>& recs, const std::string& q, int sample) {
  for (const auto& r : recs)
    if (r.quantity == q && r.sample == sample) return &r;
  return nullptr;
}

}  // namespace

TEST_CASE("grid ranges") {
  const auto v = GridRange::parse("0:1:0.1").values();
  REQUIRE(v.size() == 11);
  CHECK(v.back() == doctest::Approx(1.0));
  CHECK(GridRange::parse("0:8:0.25").values().size() == 33);
  CHECK(GridRange::parse("2.5").values() == std::vector<double>{2.5});
  CHECK(GridRange::parse("1:2:5").values() == std::vector<double>{1.0});
  CHECK_THROWS_AS(GridRange::parse("1:0:0.1"), ValidationError);
  CHECK_THROWS_AS(GridRange::parse("0:1:0"), ValidationError);
  CHECK_THROWS_AS(GridRange::parse("0:1"), ValidationError);
  CHECK_THROWS_AS(GridRange::parse("abc"), ValidationError);
  CHECK_THROWS_AS(GridRange::parse("1x"), ValidationError);
}

TEST_CASE("quantity names") {
  const auto q = parse_quantities("f_im,winding,,o_dw");
  CHECK(q == std::set<Quantity>{Quantity::FIm, Quantity::Winding, Quantity::ODw});
  for (Quantity x : {Quantity::IprObc, Quantity::IprPbc, Quantity::FIm, Quantity::Winding,
                     Quantity::FockIpr, Quantity::ODw, Quantity::Density})
    CHECK(parse_quantity(to_string(x)) == x);
  CHECK_THROWS_AS(parse_quantity("ipr"), ValidationError);
}

TEST_CASE("theta0 sampling") {
  SweepSpec spec;
  spec.theta0_samples = 4;
  const auto even = spec.theta0_values();
  CHECK(even == std::vector<double>{0.0, std::numbers::pi / 2, std::numbers::pi, 3 * std::numbers::pi / 2});
  spec.seed = 42;
  const auto a = spec.theta0_values(), b = spec.theta0_values();
  CHECK(a == b);
  for (double t : a) CHECK((t >= 0.0 && t < 2 * std::numbers::pi));
  spec.seed = 43;
  CHECK(spec.theta0_values() != a);
}

TEST_CASE("spec validation") {
  SweepSpec spec = small_spec();
  CHECK_NOTHROW(spec.validate());
  spec.theta0_samples = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = small_spec();
  spec.quantities.clear();
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = small_spec();
  spec.quantities = {Quantity::ODw};
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = small_spec();
  spec.e0_at_ground_state = true;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("grid order is g, then V, then W") {
  SweepSpec spec = small_spec();
  spec.v_grid = GridRange::parse("0:1:1");
  const auto pts = grid_points(spec);
  REQUIRE(pts.size() == 3 * 2 * 3);
  CHECK(pts[0].g == 0.0);
  CHECK(pts[1].W == 2.5);
  CHECK(pts[3].V == 1.0);
  CHECK(pts[6].g == 0.25);
}

TEST_CASE("a one-point sweep reproduces direct calls") {
  SweepSpec spec;
  spec.base.L = 34;
  spec.base.bc = Boundary::Periodic;
  spec.base.theta0 = 0.0;
  spec.g_grid = GridRange::single(0.5);
  spec.w_grid = GridRange::single(1.5);
  spec.quantities = {Quantity::IprObc, Quantity::IprPbc, Quantity::FIm, Quantity::Winding};
  const auto recs = run_sweep(spec);
  CHECK(recs.size() == 8);

  ModelParams p = spec.base;
  p.g = 0.5;
  p.W = 1.5;
  const auto pbc = decompose(build_single_particle(p));
  ModelParams o = p;
  o.bc = Boundary::Open;
  const auto obc = decompose(build_single_particle(o));
  CHECK(find(recs, "ipr_pbc", 0)->value == mean_ipr(pbc));
  CHECK(find(recs, "ipr_obc", 0)->value == mean_ipr(obc));
  CHECK(find(recs, "f_im", 0)->value == imag_fraction(pbc));
  CHECK(find(recs, "winding", 0)->value == winding_number(p).nu);
  CHECK(find(recs, "f_im", -1)->value == imag_fraction(pbc));
  CHECK(find(recs, "f_im", 0)->theta0 == 0.0);
  CHECK_FALSE(find(recs, "f_im", -1)->theta0.has_value());
  CHECK(find(recs, "ipr_obc", 0)->bc == Boundary::Open);
}

TEST_CASE("many-body quantities") {
  SweepSpec spec;
  spec.base.L = 8;
  spec.base.N = 4;
  spec.base.bc = Boundary::Open;
  spec.g_grid = GridRange::single(0.5);
  spec.v_grid = GridRange::single(2.0);
  spec.w_grid = GridRange::single(0.5);
  spec.theta0_samples = 2;
  spec.quantities = {Quantity::Density, Quantity::FockIpr, Quantity::ODw, Quantity::Winding};
  spec.e0_at_ground_state = true;
  const auto recs = run_sweep(spec);
  double left = 0.0, right = 0.0;
  int density_rows = 0;
  for (const auto& r : recs) {
    if (r.quantity != "density" || r.sample != -1) continue;
    ++density_rows;
    (r.index < 4 ? left : right) += r.value;
  }
  CHECK(density_rows == 8);
  CHECK(left + right == doctest::Approx(4.0));
  CHECK(left > right);
  const auto* w = find(recs, "winding", 0);
  REQUIRE(w);
  CHECK(w->bc == Boundary::Periodic);
  CHECK(w->warnings.find("ground state") != std::string::npos);
}

TEST_CASE("averages skip failed samples") {
  std::vector<ResultRecord> s(3);
  for (int i = 0; i < 3; ++i) {
    s[i].quantity = "winding";
    s[i].sample = i;
    s[i].theta0 = i;
    s[i].value = i == 1 ? NAN : 2.0 * i;
  }
  const auto m = aggregate(s, 3);
  REQUIRE(m.size() == 1);
  CHECK(m[0].value == 2.0);
  CHECK(m[0].sample == -1);
  CHECK(m[0].warnings == "1 of 3 samples failed");
}

TEST_CASE("numerical failures become warnings") {
  SweepSpec spec = small_spec();
  spec.winding.det_floor = 1e10;
  spec.quantities = {Quantity::Winding, Quantity::FIm};
  const auto recs = run_sweep(spec);
  CHECK(recs.size() == 9 * 4 * 2);
  for (const auto& r : recs) {
    if (r.quantity != "winding") continue;
    CHECK(std::isnan(r.value));
    CHECK_FALSE(r.warnings.empty());
  }
}

TEST_CASE("output does not depend on the thread count") {
  SweepSpec spec = small_spec();
  auto csv = [&](int threads) {
    spec.threads = threads;
    std::ostringstream os;
    run_sweep(spec, [&](const ResultRecord& r) { write_record_csv(os, r); });
    return os.str();
  };
  const std::string one = csv(1);
  CHECK(csv(2) == one);
  CHECK(csv(4) == one);
}

TEST_CASE("resume skips completed points") {
  SweepSpec spec = small_spec();
  std::ostringstream full;
  write_record_header(full);
  run_sweep(spec, [&](const ResultRecord& r) { write_record_csv(full, r); });

  std::istringstream in(full.str());
  const auto done = completed_points(in, spec.quantities);
  CHECK(done.size() == grid_points(spec).size());
  std::istringstream again(full.str());
  CHECK(completed_points(again, {Quantity::FockIpr}).empty());

  // keep the first two points plus part of the third
  const std::string text = full.str();
  std::size_t cut = 0;
  for (int line = 0; line < 1 + 2 * 16 + 5; ++line) cut = text.find('\n', cut) + 1;
  std::istringstream partial(text.substr(0, cut));
  const auto have = completed_points(partial, spec.quantities);
  CHECK(have.size() == 2);
  std::istringstream partial2(text.substr(0, cut));
  std::ostringstream pruned;
  CHECK(retain_points(partial2, pruned, have) == 32);
  run_sweep(spec, [&](const ResultRecord& r) { write_record_csv(pruned, r); }, have);
  CHECK(pruned.str() == text);
}

TEST_CASE("more samples change smooth averages only slightly") {
  SweepSpec spec;
  spec.base.L = 89;
  spec.base.bc = Boundary::Periodic;
  spec.g_grid = GridRange::single(0.5);
  spec.w_grid = GridRange::single(0.5 * critical_disorder(0.5));
  spec.quantities = {Quantity::FIm};
  auto mean = [&](int S) {
    spec.theta0_samples = S;
    for (const auto& r : run_sweep(spec))
      if (r.sample == -1) return r.value;
    return std::nan("");
  };
  const double a = mean(10), b = mean(20);
  CHECK(std::abs(a - b) <= 0.1 * a);
}

TEST_CASE("flat configuration files") {
  std::istringstream in("# chain\nL = 12\nN=6\n\ng=0.5 # non-reciprocity\nbc=pbc\nflux=0.25\n");
  const ConfigMap cfg = parse_config(in);
  CHECK(cfg.at("L") == "12");
  CHECK(cfg.at("g") == "0.5");
  const ModelParams p = params_from_config(cfg);
  CHECK(p.L == 12);
  CHECK(p.N == 6);
  CHECK(p.bc == Boundary::Periodic);
  CHECK(p.phi == 0.25);

  std::istringstream round(to_config(p));
  const ModelParams q = params_from_config(parse_config(round));
  CHECK(q.L == p.L);
  CHECK(q.g == p.g);
  CHECK(q.theta == p.theta);
  CHECK(q.phi == p.phi);

  CHECK_THROWS_AS(params_from_config({{"Lx", "3"}}), ValidationError);
  CHECK_THROWS_AS(params_from_config({{"L", "three"}}), ValidationError);
  std::istringstream bad("L 12\n");
  CHECK_THROWS_AS(parse_config(bad), ValidationError);
}

TEST_CASE("number and CSV formatting") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23}) CHECK(std::stod(format_number(x)) == x);
  CHECK(format_number(NAN) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  const auto f = split_csv_line("1,\"a,b\",\"x\"\"y\",");
  CHECK(f == std::vector<std::string>{"1", "a,b", "x\"y", ""});
}

TEST_CASE("spectrum and record writers") {
  CVector ev(2);
  ev << cplx(-1.0, 0.5), cplx(2.0, 0.0);
  std::ostringstream csv;
  write_spectrum_csv(csv, ev);
  CHECK(csv.str() == "index,re,im\n0,-1,0.5\n1,2,0\n");
  std::ostringstream js;
  write_spectrum_json(js, ev);
  const auto j = nlohmann::json::parse(js.str());
  CHECK(j.size() == 2);
  CHECK(j[0]["im"] == 0.5);

  ResultRecord r;
  r.L = 8;
  r.N = 4;
  r.W = 1.5;
  r.quantity = "density";
  r.index = 3;
  r.value = 0.25;
  r.warnings = "a, b";
  std::ostringstream rc;
  write_record_csv(rc, r);
  CHECK(rc.str() == "8,4,0,0,1.5,,obc,mean,density,3,0.25,\"a, b\"\n");
  std::ostringstream rj;
  r.value = NAN;
  write_records_json(rj, {r});
  const auto rec = nlohmann::json::parse(rj.str())[0];
  CHECK(rec["sample"] == "mean");
  CHECK(rec["value"].is_null());
  CHECK(rec["theta0"].is_null());
  CHECK(rec["index"] == 3);
}
