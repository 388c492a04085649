// fockme: experiment runner for Fock-state and N-photon wave packets.
//
//   fockme run file.json [--set key=value ...] [--output out.csv]
//   fockme sweep   [file.json] --bandwidths 0.5,1,2 --photons 1,2
//   fockme fit     [file.json] --photons 10:40
//   fockme scatter [file.json] --bandwidths 0.05,3,100 --photons 1,5
//   fockme oracle  [file.json] --photons 2 --bins 2000
//   fockme map     [file.json] --photons 1 --bandwidths 1,2 --t-s -2:2:41
//
// Exit codes: 0 success, 2 invalid run file or input, 3 integrator abort, 1 other.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fockme/errors.hpp"
#include "fockme/runfile.hpp"
#include "fockme/simd/kernels.hpp"

using nlohmann::json;

namespace {

// "1,2,5" -> [1,2,5]; "a:b" -> {"from": a, "to": b}; "a:b:n" -> {"from", "to", "count"}.
json parse_list(const std::string& key, const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      const auto second = text.find(':', colon + 1);
      json range{{"from", json::parse(text.substr(0, colon))}};
      if (second == std::string::npos) {
        range["to"] = json::parse(text.substr(colon + 1));
      } else {
        range["to"] = json::parse(text.substr(colon + 1, second - colon - 1));
        range["count"] = json::parse(text.substr(second + 1));
      }
      return range;
    }
    return json::parse("[" + text + "]");
  } catch (const json::parse_error&) {
    throw fockme::SchemaError(key, "cannot parse \"" + text + "\" as a list or range");
  }
}

struct Command {
  CLI::App* app = nullptr;
  std::string experiment;  // empty: taken from the run file
  std::string runfile;
  std::string output;
  std::string meta_output;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> list_flags;  // (config key, raw text)
  std::vector<std::pair<std::string, std::string>> scalar_flags;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int execute(const Command& cmd) {
  json config = json::object();
  std::filesystem::path base_dir;
  if (!cmd.runfile.empty()) {
    config = fockme::load_runfile(cmd.runfile);
    base_dir = std::filesystem::path(cmd.runfile).parent_path();
  }
  if (!config.is_object()) throw fockme::SchemaError("<root>", "run file must be an object");
  if (!cmd.experiment.empty()) {
    if (config.contains("experiment") && config["experiment"] != cmd.experiment) {
      throw fockme::SchemaError("experiment", "run file is for \"" +
                                                  config["experiment"].dump() +
                                                  "\", not \"" + cmd.experiment + "\"");
    }
    config["experiment"] = cmd.experiment;
  }
  for (const auto& [key, text] : cmd.list_flags) config[key] = parse_list(key, text);
  for (const auto& [key, text] : cmd.scalar_flags) fockme::set_override(config, key + "=" + text);
  for (const auto& s : cmd.sets) fockme::set_override(config, s);
  if (!cmd.output.empty()) config["output"] = cmd.output;
  if (!cmd.meta_output.empty()) config["meta_output"] = cmd.meta_output;

  const fockme::RunOutput result = fockme::run_experiment(config, base_dir);
  const std::string output = config.value("output", std::string());
  std::string meta_path = config.value("meta_output", std::string());
  if (meta_path.empty() && !output.empty()) meta_path = output + ".json";
  if (output.empty()) {
    std::cout << result.csv;
  } else {
    write_text(output, result.csv);
  }
  const std::string meta = result.meta.dump(2) + "\n";
  if (meta_path.empty()) {
    std::cerr << meta;
  } else {
    write_text(meta_path, meta);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fock-state wave packet hierarchy engine"};
  app.require_subcommand(1);
  std::string simd;
  app.add_option("--simd", simd, "Kernel backend: scalar or avx2")
      ->check(CLI::IsMember({"scalar", "avx2"}));

  std::vector<Command> cmds;
  cmds.reserve(6);
  auto add = [&](const std::string& name, const std::string& experiment, const std::string& help) {
    Command& c = cmds.emplace_back();
    c.experiment = experiment;
    c.app = app.add_subcommand(name, help);
    auto* file = c.app->add_option("runfile", c.runfile, "Run file (JSON)");
    if (experiment.empty()) file->required();
    c.app->add_option("-o,--output", c.output, "CSV output path (default: stdout)");
    c.app->add_option("--meta", c.meta_output, "JSON metadata path (default: <output>.json or stderr)");
    c.app->add_option("--set", c.sets, "Override a run-file key: path=value");
    return &c;
  };
  // Flags are stored as (key, text) and applied after the run file is loaded.
  auto list_flag = [](Command* c, const std::string& flag, const std::string& key,
                      const std::string& help) {
    c->app->add_option_function<std::string>(
        flag, [c, key](const std::string& v) { c->list_flags.emplace_back(key, v); }, help);
  };
  auto scalar_flag = [](Command* c, const std::string& flag, const std::string& key,
                        const std::string& help) {
    c->app->add_option_function<std::string>(
        flag, [c, key](const std::string& v) { c->scalar_flags.emplace_back(key, v); }, help);
  };

  add("run", "", "Run any experiment described by a run file");

  Command* sweep = add("sweep", "excite_sweep", "Maximum excitation probability over (bandwidth, N)");
  list_flag(sweep, "--bandwidths", "bandwidths", "List a,b,c or log range from:to:count");
  list_flag(sweep, "--photons", "photons", "List a,b,c or range from:to");

  Command* fit = add("fit", "scaling_fit", "Per-N bandwidth optimization and scaling fits");
  list_flag(fit, "--photons", "photons", "List a,b,c or range from:to (default 10:40)");

  Command* scatter = add("scatter", "scatter_sweep", "Waveguide transmission and reflection");
  list_flag(scatter, "--bandwidths", "bandwidths", "List a,b,c or log range from:to:count");
  list_flag(scatter, "--photons", "photons", "List a,b,c or range from:to");

  Command* oracle = add("oracle", "oracle_check", "Hierarchy vs time-bin collision model");
  scalar_flag(oracle, "--photons", "photons", "Photon number");
  scalar_flag(oracle, "--bandwidth", "bandwidth", "Gaussian bandwidth");
  scalar_flag(oracle, "--bins", "bins", "Number of time bins");
  scalar_flag(oracle, "--samples", "samples", "Comparison times");

  Command* map = add("map", "strong_coupling_map", "Average strong-coupling parameter");
  list_flag(map, "--photons", "photons", "List a,b,c or range from:to");
  list_flag(map, "--bandwidths", "bandwidths", "List a,b,c or log range from:to:count");
  list_flag(map, "--t-s", "t_s", "Window centres: list or linear range from:to:count");
  scalar_flag(map, "--tau", "tau", "Averaging window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simd == "scalar") fockme::simd::set_backend(fockme::simd::Backend::Scalar);
    if (simd == "avx2") fockme::simd::set_backend(fockme::simd::Backend::Avx2);
    for (const auto& c : cmds) {
      if (c.app->parsed()) return execute(c);
    }
  } catch (const fockme::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const fockme::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const fockme::IntegratorAbort& e) {
    std::cerr << "integrator abort: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
