#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fockme/errors.hpp"
#include "fockme/runfile.hpp"

using namespace fockme;
using nlohmann::json;

namespace {

const std::filesystem::path kConfigs = FOCKME_CONFIG_DIR;

std::string schema_path(const json& config) {
  try {
    run_experiment(config);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<no error>";
}

// Last value of a CSV column.
double last_value(const std::string& csv, const std::string& column) {
  std::istringstream in(csv);
  std::string line, header, last;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty())
      header = line;
    else
      last = line;
  }
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  auto h = split(header);
  auto v = split(last);
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] == column) return std::stod(v.at(i));
  FAIL("missing column " << column);
  return 0.0;
}

json fock_run(int n) {
  return {{"experiment", "single_run"},
          {"packet", {{"kind", "gaussian"}, {"omega", 1.46}}},
          {"field", {{"kind", "fock"}, {"n", n}}}};
}

}  // namespace

TEST_CASE("integrated flux counts photons in the shipped configs") {
  auto one = run_experiment(load_runfile(kConfigs / "gaussian_fock.json"), kConfigs);
  CHECK(std::abs(last_value(one.csv, "flux_1") - 1.0) < 0.01);
  auto sup = run_experiment(load_runfile(kConfigs / "gaussian_superposition.json"), kConfigs);
  CHECK(std::abs(last_value(sup.csv, "flux_1") - 1.5) < 0.01);
  auto cfg = load_runfile(kConfigs / "gaussian_fock.json");
  set_override(cfg, "field.n=2");
  auto two = run_experiment(cfg, kConfigs);
  CHECK(std::abs(last_value(two.csv, "flux_1") - 2.0) < 0.01);
}

TEST_CASE("tables carry the engine and config hash") {
  auto cfg = fock_run(1);
  auto out = run_experiment(cfg);
  CHECK(out.experiment == "single_run");
  CHECK(out.csv.rfind(table_preamble(cfg), 0) == 0);
  CHECK(out.csv.find("# engine fockme 1.0.0\n") == 0);
  CHECK(out.meta["config_hash"] == config_hash(cfg));
  CHECK(out.meta["engine"] == kEngineVersion);
  CHECK(run_experiment(cfg).csv == out.csv);
}

TEST_CASE("config hash") {
  json a = json::parse(R"({"experiment": "single_run", "field": {"n": 1, "kind": "fock"}})");
  json b = json::parse(R"({"field": {"kind": "fock", "n": 1}, "experiment": "single_run"})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b["field"]["n"] = 2;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("overrides") {
  json c = json::object();
  set_override(c, "integrator.rtol=1e-9");
  set_override(c, "system.preset=two_level");
  set_override(c, "photons=[1,2,3]");
  CHECK(c["integrator"]["rtol"] == 1e-9);
  CHECK(c["system"]["preset"] == "two_level");
  CHECK(c["photons"].size() == 3);
  CHECK_THROWS_AS(set_override(c, "no_equals"), SchemaError);
  CHECK_THROWS_AS(set_override(c, "photons.x=1"), SchemaError);
  CHECK_THROWS_AS(set_override(c, "a..b=1"), SchemaError);
}

TEST_CASE("schema errors name the offending field") {
  CHECK(schema_path(json::object()) == "experiment");
  CHECK(schema_path({{"experiment", "nope"}}) == "experiment");
  auto c = fock_run(-1);
  CHECK(schema_path(c) == "field.n");
  c = fock_run(1);
  c["field"]["extra"] = 1;
  CHECK(schema_path(c) == "field.extra");
  c = fock_run(1);
  c.erase("field");
  CHECK(schema_path(c) == "field");
  c = fock_run(1);
  c["packet"]["omega"] = -2.0;
  CHECK(schema_path(c).rfind("packet", 0) == 0);
  c = fock_run(1);
  c["field"] = {{"kind", "superposition"}, {"amplitudes", {0.0, 1.0, "x"}}};
  CHECK(schema_path(c) == "field.amplitudes[2]");
  c = fock_run(1);
  c["integrator"] = {{"rtol", "tight"}};
  CHECK(schema_path(c) == "integrator.rtol");
  c = fock_run(1);
  c["initial"] = 5;
  CHECK(schema_path(c) == "initial");
  CHECK(schema_path({{"experiment", "excite_sweep"}, {"bandwidths", json::array()}}) ==
        "bandwidths");
  CHECK(schema_path({{"experiment", "oracle_check"}, {"photons", 1}, {"bins", 1001}, {"samples", 10}}) == "bins");
}

TEST_CASE("load errors") {
  CHECK_THROWS_AS(load_runfile("/nonexistent/run.json"), SchemaError);
  auto path = std::filesystem::temp_directory_path() / "fockme_bad_run.json";
  {
    std::ofstream out(path);
    out << "{ \"experiment\": ";
  }
  CHECK_THROWS_AS(load_runfile(path), SchemaError);
  {
    std::ofstream out(path);
    out << "// comment\n{ \"experiment\": \"single_run\" }";
  }
  CHECK(load_runfile(path)["experiment"] == "single_run");
  std::filesystem::remove(path);
}

TEST_CASE("system presets and explicit operators") {
  auto wg = parse_system({{"system", {{"preset", "waveguide"}, {"gamma_forward", 0.2}, {"gamma_backward", 0.8}}}});
  CHECK(wg.modes() == 2);
  CHECK(dominant_decay_rate(wg) == doctest::Approx(1.0));
  auto sc = parse_system({{"system", {{"preset", "scattering"}}}});
  CHECK(sc.modes() == 2);
  auto def = parse_system(json::object());
  CHECK(def.modes() == 1);

  json explicit_sys = {{"system",
                        {{"h", to_json(Operator::zero(2))},
                         {"l", {to_json(two_level::sigma_minus())}}}}};
  auto ex = parse_system(explicit_sys);
  CHECK(max_abs_diff(ex.s[0][0], Operator::identity(2)) == 0.0);

  json bad = {{"system", {{"h", to_json(two_level::sigma_minus())}, {"l", {to_json(two_level::sigma_minus())}}}}};
  CHECK_THROWS_AS(parse_system(bad), SchemaError);
}

TEST_CASE("empty field gives identically zero observables") {
  auto out = run_experiment(fock_run(0));
  std::istringstream in(out.csv);
  std::string line;
  bool header = true;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // t
    while (std::getline(ss, cell, ',')) CHECK(std::stod(cell) == 0.0);
    ++rows;
  }
  CHECK(rows > 0);
}

TEST_CASE("sweeps are pure functions of the run file") {
  json c = {{"experiment", "excite_sweep"}, {"bandwidths", {1.0, 3.0}}, {"photons", {1, 2}}};
  auto a = run_experiment(c);
  auto b = run_experiment(c);
  CHECK(a.csv == b.csv);
  CHECK(a.meta == b.meta);
}
