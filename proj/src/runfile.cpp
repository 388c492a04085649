#include "fockme/runfile.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "fockme/errors.hpp"

namespace fockme {

namespace {

using nlohmann::json;

// Read-only view of a JSON node that remembers where it came from.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  Node at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) throw SchemaError(child_path(key), "missing required field");
    return {j_.at(key), child_path(key)};
  }
  Node at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError(path_.empty() ? "<root>" : path_, what);
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be > 0");
    return v;
  }
  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<int>();
  }
  int count(int min) const {
    const int v = integer();
    if (v < min) fail("must be >= " + std::to_string(min));
    return v;
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  cplx complex() const {
    if (j_.is_number()) return {j_.get<double>(), 0.0};
    if (j_.is_array() && j_.size() == 2 && j_[0].is_number() && j_[1].is_number()) {
      return {j_[0].get<double>(), j_[1].get<double>()};
    }
    fail("expected a number or [re, im]");
  }
  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number(const std::string& key, double def) const { return has(key) ? at(key).number() : def; }
  double positive(const std::string& key, double def) const {
    return has(key) ? at(key).positive() : def;
  }
  int count(const std::string& key, int min, int def) const {
    return has(key) ? at(key).count(min) : def;
  }

  void only(const std::set<std::string>& allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (const auto& [k, v] : j_.items()) {
      if (!allowed.count(k)) throw SchemaError(child_path(k), "unknown field");
    }
  }

 private:
  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
};

// Re-raises library validation failures as schema errors at `node`.
template <class F>
auto guarded(const Node& node, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const InvalidInput& e) {
    node.fail(e.what());
  } catch (const json::exception& e) {
    node.fail(e.what());
  }
}

std::vector<double> number_list(const Node& n) {
  std::vector<double> out;
  if (n.raw().is_number()) return {n.positive()};
  if (n.raw().is_object()) {
    n.only({"from", "to", "count", "spacing"});
    const double lo = n.at("from").positive();
    const double hi = n.at("to").positive();
    const int c = n.at("count").count(1);
    const std::string spacing = n.has("spacing") ? n.at("spacing").string() : "log";
    if (hi < lo) n.fail("\"to\" must be >= \"from\"");
    if (spacing == "log") return log_space(lo, hi, static_cast<std::size_t>(c));
    if (spacing != "linear") n.at("spacing").fail("expected \"log\" or \"linear\"");
    for (int i = 0; i < c; ++i) out.push_back(c == 1 ? lo : lo + (hi - lo) * i / (c - 1));
    return out;
  }
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(n.at(i).positive());
  if (out.empty()) n.fail("empty list");
  return out;
}

// Linear grid that may include zero and negative values.
std::vector<double> linear_grid(const Node& n) {
  std::vector<double> out;
  if (n.raw().is_object()) {
    n.only({"from", "to", "count"});
    const double lo = n.at("from").number();
    const double hi = n.at("to").number();
    const int c = n.at("count").count(1);
    for (int i = 0; i < c; ++i) out.push_back(c == 1 ? lo : lo + (hi - lo) * i / (c - 1));
    return out;
  }
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(n.at(i).number());
  if (out.empty()) n.fail("empty list");
  return out;
}

std::vector<int> photon_list(const Node& n) {
  std::vector<int> out;
  if (n.raw().is_number_integer()) return {n.count(1)};
  if (n.raw().is_object()) {
    n.only({"from", "to"});
    const int lo = n.at("from").count(1);
    const int hi = n.at("to").count(lo);
    for (int i = lo; i <= hi; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(n.at(i).count(1));
  if (out.empty()) n.fail("empty list");
  return out;
}

Operator parse_operator(const Node& n) {
  return guarded(n, [&] { return operator_from_json(n.raw()); });
}

// "ground" / "excited" / basis index / operator object.
Operator parse_state(const Node& n, std::size_t dim) {
  std::size_t k = 0;
  if (n.raw().is_string()) {
    const std::string s = n.string();
    if (s == "ground") {
      k = 0;
    } else if (s == "excited") {
      k = 1;
    } else {
      n.fail("expected \"ground\", \"excited\", a basis index or an operator");
    }
  } else if (n.raw().is_number_integer()) {
    k = static_cast<std::size_t>(n.count(0));
  } else {
    Operator op = parse_operator(n);
    if (op.dim() != dim) n.fail("dimension does not match the system");
    return op;
  }
  if (k >= dim) n.fail("basis index outside the system dimension");
  return Operator::basis(dim, k, k);
}

WavePacket parse_packet(const Node& n, const std::filesystem::path& base_dir) {
  return guarded(n, [&] { return packet_from_json(n.raw(), base_dir); });
}

// {"mode1": {"packet", "n"}, "mode2": {"packet", "q"}}: Fock input |N;Q>.
FieldSpec parse_mode_pair(const Node& root, const std::filesystem::path& base_dir) {
  const Node m1 = root.at("mode1");
  m1.only({"packet", "n"});
  const WavePacket xi = parse_packet(m1.at("packet"), base_dir);
  const int n = m1.count("n", 0, 0);
  int q = 0;
  std::optional<WavePacket> eta;
  if (root.has("mode2")) {
    const Node m2 = root.at("mode2");
    m2.only({"packet", "q"});
    if (m2.has("packet")) eta = parse_packet(m2.at("packet"), base_dir);
    q = m2.count("q", 0, 0);
  }
  return TwoModeField{xi, eta.value_or(xi), TwoModeCombination::fock(n, q)};
}

FieldSpec parse_field(const Node& root, const std::filesystem::path& base_dir) {
  if (root.has("mode1")) {
    if (root.has("field")) root.at("field").fail("use either \"field\" or \"mode1\"/\"mode2\"");
    return parse_mode_pair(root, base_dir);
  }
  const Node f = root.at("field");
  const std::string kind = f.at("kind").string();
  auto packet = [&](const char* key) { return parse_packet(root.at(key), base_dir); };

  if (kind == "npacket") {
    return NPacketField{guarded(f, [&] {
      json body = f.raw();
      body.erase("kind");
      return npacket_from_json(body, base_dir);
    })};
  }
  if (kind == "twomode" || kind == "twomode_combination" || kind == "noon") {
    TwoModeField tm{packet("packet"), root.has("packet2") ? packet("packet2") : packet("packet"), {}};
    if (kind == "twomode") {
      f.only({"kind", "n", "q"});
      tm.combo = TwoModeCombination::fock(f.count("n", 0, 0), f.count("q", 0, 0));
    } else if (kind == "noon") {
      f.only({"kind"});
      tm.combo = TwoModeCombination::noon_one_photon();
    } else {
      f.only({"kind", "coeffs"});
      const Node cs = f.at("coeffs");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const Node c = cs.at(i);
        c.only({"m", "n", "p", "q", "c"});
        tm.combo.coeffs[{c.at("m").count(0), c.at("n").count(0), c.at("p").count(0),
                         c.at("q").count(0)}] = c.at("c").complex();
      }
    }
    guarded(f, [&] {
      tm.combo.validate();
      return 0;
    });
    return tm;
  }

  FockField ff{packet("packet"), {}};
  if (kind == "fock") {
    f.only({"kind", "n"});
    ff.combo = FieldCombination::fock(f.at("n").count(0));
  } else if (kind == "superposition") {
    f.only({"kind", "amplitudes"});
    const Node a = f.at("amplitudes");
    std::vector<cplx> amps;
    for (std::size_t i = 0; i < a.size(); ++i) amps.push_back(a.at(i).complex());
    ff.combo = FieldCombination::superposition(amps);
  } else if (kind == "mixture") {
    f.only({"kind", "probabilities"});
    const Node a = f.at("probabilities");
    std::vector<double> probs;
    for (std::size_t i = 0; i < a.size(); ++i) probs.push_back(a.at(i).number());
    ff.combo = FieldCombination::mixture(probs);
  } else if (kind == "combination") {
    f.only({"kind", "coeffs"});
    const Node cs = f.at("coeffs");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const Node c = cs.at(i);
      c.only({"m", "n", "c"});
      ff.combo.coeffs[{c.at("m").count(0), c.at("n").count(0)}] = c.at("c").complex();
    }
  } else {
    f.at("kind").fail("unknown field kind \"" + kind + "\"");
  }
  guarded(f, [&] {
    ff.combo.validate();
    return 0;
  });
  return ff;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string csv(const json& config) const {
    std::ostringstream os;
    os << table_preamble(config);
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    char buf[64];
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", r[i]);
        os << (i ? "," : "") << buf;
      }
      os << '\n';
    }
    return os.str();
  }
};

ExciteOptions excite_options(const Node& root) {
  ExciteOptions opt;
  opt.gamma = root.positive("gamma", opt.gamma);
  opt.arrival = root.positive("arrival", opt.arrival);
  opt.samples = static_cast<std::size_t>(root.count("samples", 3, static_cast<int>(opt.samples)));
  if (root.has("integrator")) {
    const Node in = root.at("integrator");
    in.only({"rtol", "atol"});
    opt.rtol = in.positive("rtol", opt.rtol);
    opt.atol = in.positive("atol", opt.atol);
  }
  return opt;
}

const std::set<std::string> kCommon{"experiment", "output", "meta_output", "description"};

std::set<std::string> with_common(std::set<std::string> keys) {
  keys.insert(kCommon.begin(), kCommon.end());
  return keys;
}

RunOutput run_single_experiment(const Node& root, const std::filesystem::path& base_dir) {
  const SingleRunConfig cfg = parse_single_run(root.raw(), base_dir);
  IntegrationStats stats;
  const TimeSeriesRecord rec = run_single(cfg, &stats);
  Table t{rec.columns, rec.rows};
  RunOutput out;
  out.csv = t.csv(root.raw());
  out.meta["steps"] = stats.steps;
  out.meta["rejected"] = stats.rejected;
  out.meta["rhs_evals"] = stats.rhs_evals;
  return out;
}

RunOutput run_excite(const Node& root) {
  root.only(with_common({"bandwidths", "photons", "gamma", "arrival", "samples", "integrator"}));
  const auto omegas = number_list(root.at("bandwidths"));
  const auto photons = photon_list(root.at("photons"));
  const ExciteOptions opt = excite_options(root);
  const auto pts = run_excite_sweep(omegas, photons, opt);
  Table t{{"omega", "N", "p_max", "t_peak", "steps", "asymptote", "recursion"}, {}};
  bool truncated = false;
  for (const auto& p : pts) {
    const double rec = p.omega / opt.gamma <= 0.05
                           ? recursive_small_bandwidth(
                                 p.photons, WavePacket::gaussian(p.omega, opt.arrival / p.omega),
                                 opt.gamma)
                           : std::numeric_limits<double>::quiet_NaN();
    t.rows.push_back({p.omega, double(p.photons), p.p_max, p.t_peak, double(p.steps),
                      5.0 * p.photons * opt.gamma / p.omega, rec});
    truncated = truncated || p.peak_at_end;
  }
  RunOutput out;
  out.csv = t.csv(root.raw());
  out.meta["points"] = pts.size();
  out.meta["peak_at_window_end"] = truncated;
  return out;
}

RunOutput run_scaling(const Node& root) {
  root.only(with_common({"photons", "gamma", "arrival", "samples", "integrator"}));
  std::vector<int> photons;
  if (root.has("photons")) {
    photons = photon_list(root.at("photons"));
  } else {
    for (int n = 10; n <= 40; ++n) photons.push_back(n);
  }
  const ExciteOptions opt = excite_options(root);
  const auto pts = run_scaling_sweep(photons, opt);
  Table t{{"N", "omega_opt", "p_max", "evaluations"}, {}};
  for (const auto& p : pts) {
    t.rows.push_back({double(p.photons), p.omega_opt, p.p_max, double(p.evaluations)});
  }
  RunOutput out;
  out.csv = t.csv(root.raw());
  if (pts.size() >= 3) {
    const ScalingFits fits = fit_scaling(pts);
    out.meta["fit_p_max"] = to_json(fits.p_max);
    out.meta["fit_omega_opt"] = to_json(fits.omega_opt);
  } else {
    out.meta["fit_error"] = "need at least 3 photon numbers to fit";
  }
  return out;
}

RunOutput run_map(const Node& root, const std::filesystem::path& base_dir) {
  root.only(with_common(
      {"photons", "tau", "t_s", "bandwidths", "arrival", "packet", "gamma", "gamma_g"}));
  const auto photons = photon_list(root.at("photons"));
  const double gamma = root.positive("gamma", 1.0);
  const double gamma_g = root.positive("gamma_g", gamma);
  const double tau = root.positive("tau", 1.0 / gamma);
  const auto grid = linear_grid(root.at("t_s"));
  Table t;
  if (root.has("bandwidths")) {
    if (root.has("packet")) root.at("packet").fail("use either \"packet\" or \"bandwidths\"");
    const double arrival = root.positive("arrival", 8.0);
    t.columns = {"omega", "N", "offset", "t_s", "value"};
    for (int n : photons) {
      for (double om : number_list(root.at("bandwidths"))) {
        const double t_a = arrival / om;
        std::vector<double> ts;
        for (double off : grid) ts.push_back(t_a + off);
        const auto v = strong_coupling_map(WavePacket::gaussian(om, t_a), n, tau, ts, gamma_g, gamma);
        for (std::size_t i = 0; i < ts.size(); ++i) t.rows.push_back({om, double(n), grid[i], ts[i], v[i]});
      }
    }
  } else {
    const WavePacket xi = parse_packet(root.at("packet"), base_dir);
    t.columns = {"N", "t_s", "value"};
    for (int n : photons) {
      const auto v = strong_coupling_map(xi, n, tau, grid, gamma_g, gamma);
      for (std::size_t i = 0; i < grid.size(); ++i) t.rows.push_back({double(n), grid[i], v[i]});
    }
  }
  RunOutput out;
  out.csv = t.csv(root.raw());
  out.meta["tau"] = tau;
  return out;
}

RunOutput run_rabi(const Node& root) {
  root.only(with_common({"photons", "t_max", "samples", "gamma"}));
  RabiOptions opt;
  opt.gamma = root.positive("gamma", opt.gamma);
  opt.samples = static_cast<std::size_t>(root.count("samples", 3, static_cast<int>(opt.samples)));
  const int n = root.at("photons").count(1);
  const double t_max = root.at("t_max").positive();
  const RabiResult r = run_rabi_rect(n, t_max, opt);
  Table t{{"t", "p_e", "predicted"}, {}};
  for (const auto& row : r.series.rows) {
    const double s = std::sin(0.5 * r.predicted * row[0]);
    t.rows.push_back({row[0], row[1], s * s});
  }
  RunOutput out;
  out.csv = t.csv(root.raw());
  out.meta["predicted"] = r.predicted;
  out.meta["freq_fit"] = r.freq_fit;
  out.meta["freq_peak"] = r.freq_peak ? json(*r.freq_peak) : json(nullptr);
  out.meta["extrema"] = r.extrema;
  out.meta["p_max"] = r.p_max;
  out.meta["full_oscillation"] = r.full_oscillation;
  return out;
}

RunOutput run_scatter(const Node& root) {
  root.only(with_common({"bandwidths", "photons", "tail", "integrator"}));
  ScatterOptions opt;
  opt.tail = root.positive("tail", opt.tail);
  if (root.has("integrator")) {
    const Node in = root.at("integrator");
    in.only({"rtol", "atol"});
    opt.rtol = in.positive("rtol", opt.rtol);
    opt.atol = in.positive("atol", opt.atol);
  }
  const auto pts =
      run_scatter_sweep(number_list(root.at("bandwidths")), photon_list(root.at("photons")), opt);
  Table t{{"omega", "N", "transmission", "reflection", "sum"}, {}};
  double worst = 0.0;
  for (const auto& p : pts) {
    t.rows.push_back({p.omega, double(p.photons), p.transmission, p.reflection,
                      p.transmission + p.reflection});
    worst = std::max(worst, std::abs(p.transmission + p.reflection - 1.0));
  }
  RunOutput out;
  out.csv = t.csv(root.raw());
  out.meta["max_sum_defect"] = worst;
  return out;
}

RunOutput run_oracle(const Node& root) {
  root.only(with_common({"photons", "bandwidth", "bins", "samples", "arrival"}));
  const int n = root.at("photons").count(1);
  const double om = root.positive("bandwidth", 1.46);
  const int bins = root.count("bins", 1, 2000);
  const int samples = root.count("samples", 1, 10);
  if (bins % samples != 0) root.at("bins").fail("must be a multiple of samples");
  const auto r = guarded(root, [&] {
    return run_oracle_check(n, om, static_cast<std::size_t>(bins), static_cast<std::size_t>(samples),
                            root.positive("arrival", 8.0));
  });
  // Oracle series first, in the single-run column layout, then the hierarchy values.
  Table t{{"t", "p_e", "flux_1", "quad_1", "p_e_hierarchy", "flux_1_hierarchy", "quad_1_hierarchy",
           "trace_distance"},
          {}};
  for (const auto& p : r.points) {
    t.rows.push_back({p.time, p.p_e_oracle, p.flux_oracle, p.quad_oracle, p.p_e_hierarchy,
                      p.flux_hierarchy, p.quad_hierarchy, p.trace_distance});
  }
  RunOutput out;
  out.csv = t.csv(root.raw());
  out.meta["worst_trace_distance"] = r.worst;
  return out;
}

}  // namespace

json load_runfile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string(), "cannot open run file");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string(), e.what());
  }
}

void set_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw SchemaError(assignment, "override must look like path=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw SchemaError(key, "empty path component");
    if (!node->is_object()) {
      if (!node->is_null()) throw SchemaError(key, "cannot descend into a non-object");
      *node = json::object();
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

std::string config_hash(const json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string table_preamble(const json& config) {
  return std::string("# engine ") + kEngineVersion + "\n# config " + config_hash(config) + "\n";
}

MultiModeSLH parse_system(const json& config) {
  const Node root(config, "");
  if (!root.has("system")) return MultiModeSLH::from_single(two_level::dipole(1.0));
  const Node s = root.at("system");
  MultiModeSLH slh;
  if (s.has("preset")) {
    const std::string preset = s.at("preset").string();
    if (preset == "two_level") {
      s.only({"preset", "gamma"});
      slh = MultiModeSLH::from_single(two_level::dipole(s.positive("gamma", 1.0)));
    } else if (preset == "waveguide") {
      s.only({"preset", "gamma_forward", "gamma_backward"});
      slh = two_level::waveguide(s.positive("gamma_forward", 0.5), s.positive("gamma_backward", 0.5));
    } else if (preset == "scattering") {
      s.only({"preset"});
      slh = scattering_preset();
    } else {
      s.at("preset").fail("unknown preset \"" + preset + "\"");
    }
  } else {
    s.only({"h", "l", "s"});
    slh.h = parse_operator(s.at("h"));
    const Node l = s.at("l");
    for (std::size_t i = 0; i < l.size(); ++i) slh.l.push_back(parse_operator(l.at(i)));
    if (slh.l.empty()) l.fail("need at least one coupling operator");
    const std::size_t m = slh.l.size();
    const std::size_t d = slh.h.dim();
    if (s.has("s")) {
      const Node sm = s.at("s");
      if (sm.size() != m) sm.fail("expected " + std::to_string(m) + " rows");
      slh.s.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        const Node row = sm.at(i);
        if (row.size() != m) row.fail("expected " + std::to_string(m) + " entries");
        for (std::size_t j = 0; j < m; ++j) slh.s[i].push_back(parse_operator(row.at(j)));
      }
    } else {
      slh.s.assign(m, std::vector<Operator>(m, Operator::zero(d)));
      for (std::size_t i = 0; i < m; ++i) slh.s[i][i] = Operator::identity(d);
    }
  }
  guarded(s, [&] {
    slh.validate();
    return 0;
  });
  return slh;
}

IntegratorConfig parse_integrator(const json& config, const IntegratorConfig& defaults) {
  const Node root(config, "");
  IntegratorConfig cfg = defaults;
  if (!root.has("integrator")) return cfg;
  const Node in = root.at("integrator");
  in.only({"method", "rtol", "atol", "dt_init", "dt_max", "dt_min", "t_start", "t_end", "samples"});
  if (in.has("method")) {
    const std::string m = in.at("method").string();
    if (m == "rk45") {
      cfg.method = Method::Rk45Adaptive;
    } else if (m == "rk4") {
      cfg.method = Method::Rk4Fixed;
    } else {
      in.at("method").fail("expected \"rk45\" or \"rk4\"");
    }
  }
  cfg.rtol = in.positive("rtol", cfg.rtol);
  cfg.atol = in.positive("atol", cfg.atol);
  cfg.dt_init = in.positive("dt_init", cfg.dt_init);
  cfg.dt_max = in.positive("dt_max", cfg.dt_max);
  cfg.dt_min = in.positive("dt_min", cfg.dt_min);
  cfg.t_start = in.number("t_start", cfg.t_start);
  cfg.t_end = in.number("t_end", cfg.t_end);
  cfg.sample_points = static_cast<std::size_t>(in.count("samples", 2, static_cast<int>(cfg.sample_points)));
  guarded(in, [&] {
    cfg.validate();
    return 0;
  });
  return cfg;
}

SingleRunConfig parse_single_run(const json& config, const std::filesystem::path& base_dir) {
  const Node root(config, "");
  root.only(with_common({"system", "packet", "packet2", "field", "mode1", "mode2", "integrator",
                         "phi", "initial", "projector", "cross_flux"}));
  SingleRunConfig cfg{parse_system(config), {}, {}, parse_field(root, base_dir), {}, 0.0};
  if (root.has("cross_flux")) {
    const Node c = root.at("cross_flux");
    if (!c.raw().is_boolean()) c.fail("expected true or false");
    cfg.cross_flux = c.raw().get<bool>();
  }
  const std::size_t d = cfg.slh.dim();
  cfg.rho0 = root.has("initial") ? parse_state(root.at("initial"), d) : Operator::basis(d, 0, 0);
  guarded(root.has("initial") ? root.at("initial") : root, [&] {
    require_density_matrix(cfg.rho0);
    return 0;
  });
  if (root.has("projector")) {
    cfg.projector = parse_state(root.at("projector"), d);
  } else if (d >= 2) {
    cfg.projector = Operator::basis(d, 1, 1);
  } else {
    root.fail("\"projector\" is required for one-dimensional systems");
  }
  cfg.phi = root.number("phi", 0.0);

  const bool two_mode = std::holds_alternative<TwoModeField>(cfg.field);
  if (two_mode != (cfg.slh.modes() == 2)) {
    root.at("field").fail(two_mode ? "two-mode field needs a two-mode system"
                                   : "single-mode field needs a single-mode system");
  }

  // Default window end: max(packet end, packet centre + 12 / gamma) over all packets.
  const double gamma = dominant_decay_rate(cfg.slh);
  double t_hi = 0.0;
  double scale = std::numeric_limits<double>::infinity();
  auto note = [&](const WavePacket& p) {
    const auto [lo, hi] = p.support();
    t_hi = std::max(t_hi, hi);
    if (gamma > 0.0) t_hi = std::max(t_hi, 0.5 * (lo + hi) + 12.0 / gamma);
    scale = std::min(scale, p.time_scale());
  };
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, FockField>) {
          note(f.xi);
        } else if constexpr (std::is_same_v<T, NPacketField>) {
          for (const auto& p : f.spec.basis.packets) note(p);
        } else {
          note(f.xi);
          note(f.eta);
        }
      },
      cfg.field);
  IntegratorConfig defaults;
  defaults.t_end = t_hi;
  if (!(defaults.t_end > defaults.t_start)) defaults.t_end = defaults.t_start + 1.0;
  cfg.integrator = parse_integrator(config, defaults);
  cap_step(cfg.integrator, gamma, std::isfinite(scale) && scale > 0.0 ? 1.0 / scale : 0.0);
  return cfg;
}

RunOutput run_experiment(const json& config, const std::filesystem::path& base_dir) {
  const Node root(config, "");
  const std::string exp = root.at("experiment").string();
  RunOutput out;
  if (exp == "single_run") {
    out = run_single_experiment(root, base_dir);
  } else if (exp == "excite_sweep") {
    out = run_excite(root);
  } else if (exp == "scaling_fit") {
    out = run_scaling(root);
  } else if (exp == "strong_coupling_map") {
    out = run_map(root, base_dir);
  } else if (exp == "rabi_rect") {
    out = run_rabi(root);
  } else if (exp == "scatter_sweep") {
    out = run_scatter(root);
  } else if (exp == "oracle_check") {
    out = run_oracle(root);
  } else {
    root.at("experiment").fail("unknown experiment \"" + exp + "\"");
  }
  out.experiment = exp;
  out.meta["experiment"] = exp;
  out.meta["engine"] = kEngineVersion;
  out.meta["config_hash"] = config_hash(config);
  return out;
}

}  // namespace fockme
