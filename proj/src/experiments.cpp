#include "fockme/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/NonLinearOptimization>

#include "fockme/errors.hpp"
#include "fockme/oracle_timebin.hpp"

namespace fockme {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Runs f(0..n-1) on the OpenMP pool and rethrows the first failure in index order.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string coordinate(int photons, double omega) {
  std::ostringstream os;
  os << "N=" << photons << " omega=" << omega;
  return os.str();
}

RhsFunction bind_rhs(const ChannelHierarchy& h) {
  return [&h](double t, const double* y, double* dy) { h.rhs(t, y, dy); };
}

struct Peak {
  double value;
  double time;
  std::size_t index;
};

// Largest sample, refined by a parabola through it and its two neighbours.
Peak sampled_peak(const std::vector<double>& v, double t0, double dt) {
  const auto k = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  Peak p{v[k], t0 + dt * static_cast<double>(k), k};
  if (k == 0 || k + 1 == v.size()) return p;
  const double ym = v[k - 1];
  const double y0 = v[k];
  const double yp = v[k + 1];
  const double curv = ym - 2.0 * y0 + yp;
  if (curv >= 0.0) return p;
  const double off = 0.5 * (ym - yp) / curv;
  p.value = y0 - 0.25 * (ym - yp) * off;
  p.time += off * dt;
  return p;
}

double excited_population(const Operator& rho) { return rho(1, 1).real(); }

// Simpson applied to the real and imaginary parts separately.
cplx simpson_complex(const std::function<cplx(double)>& f, const std::vector<double>& bps,
                     double h_max) {
  const double re = simpson([&](double t) { return f(t).real(); }, bps, h_max);
  const double im = simpson([&](double t) { return f(t).imag(); }, bps, h_max);
  return {re, im};
}

std::vector<double> breakpoints_in(const WavePacket& xi, double a, double b) {
  std::vector<double> out{a, b};
  for (double x : xi.breakpoints()) {
    if (x > a && x < b) out.push_back(x);
  }
  return out;
}

// Residual functor in the layout expected by Eigen's LevenbergMarquardt.
struct ModelFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const std::vector<double>& x;
  const std::vector<double>& y;
  bool saturation;

  int inputs() const { return 2; }
  int values() const { return static_cast<int>(x.size()); }

  double model(const Eigen::VectorXd& p, double xi) const {
    return saturation ? 1.0 - p[0] * std::pow(xi, -p[1]) : p[0] * std::pow(xi, p[1]);
  }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (std::size_t i = 0; i < x.size(); ++i) f[static_cast<Eigen::Index>(i)] = y[i] - model(p, x[i]);
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double lx = std::log(x[i]);
      if (saturation) {
        const double pw = std::pow(x[i], -p[1]);
        j(r, 0) = pw;
        j(r, 1) = -p[0] * pw * lx;
      } else {
        const double pw = std::pow(x[i], p[1]);
        j(r, 0) = -pw;
        j(r, 1) = -p[0] * pw * lx;
      }
    }
    return 0;
  }
};

FitResult fit_model(const std::vector<double>& x, const std::vector<double>& y, bool saturation) {
  if (x.size() != y.size()) throw InvalidInput("fit: x and y differ in length");
  if (x.size() < 3) throw InvalidInput("fit: need at least 3 points");
  for (double v : x) {
    if (!(v > 0.0)) throw InvalidInput("fit: x must be positive");
  }
  FitResult out;
  out.model = saturation ? "1 - a*N^(-b)" : "a*N^b";

  // Starting point from the log-linear fit of the transformed data.
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 2);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(x.size()));
  bool usable = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = saturation ? 1.0 - y[i] : y[i];
    if (!(t > 0.0)) usable = false;
    a(static_cast<Eigen::Index>(i), 0) = 1.0;
    a(static_cast<Eigen::Index>(i), 1) = std::log(x[i]);
    rhs[static_cast<Eigen::Index>(i)] = t > 0.0 ? std::log(t) : 0.0;
  }
  Eigen::VectorXd p(2);
  if (usable) {
    const Eigen::Vector2d c = a.colPivHouseholderQr().solve(rhs);
    p << std::exp(c[0]), saturation ? -c[1] : c[1];
  } else {
    p << 1.0, 1.0;
  }

  ModelFunctor f{x, y, saturation};
  Eigen::LevenbergMarquardt<ModelFunctor> lm(f);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 2000;
  const int status = lm.minimize(p);
  out.iterations = static_cast<int>(lm.iter);
  out.converged = status >= 1 && status <= 4;
  if (!out.converged) {
    std::ostringstream os;
    os << "LevenbergMarquardt status " << status;
    out.diagnostics = os.str();
  }

  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd res(n);
  Eigen::MatrixXd jac(n, 2);
  f(p, res);
  f.df(p, jac);
  const double ssr = res.squaredNorm();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sst = 0.0;
  for (double v : y) sst += (v - mean) * (v - mean);
  out.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 1.0;

  const double dof = static_cast<double>(x.size() - 2);
  const Eigen::Matrix2d cov = (ssr / dof) * (jac.transpose() * jac).inverse();
  const boost::math::students_t dist(dof);
  const double tq = boost::math::quantile(dist, 0.975);
  const char* names[] = {"a", "b"};
  for (int i = 0; i < 2; ++i) {
    const double se = std::sqrt(std::max(0.0, cov(i, i)));
    out.params.push_back({names[i], p[i], se, p[i] - tq * se, p[i] + tq * se});
  }
  return out;
}

}  // namespace

ExcitePoint excite_point(int photons, double omega, const ExciteOptions& opt) {
  if (photons < 1) throw InvalidInput("excite: need N >= 1");
  if (!(omega > 0.0)) throw InvalidInput("excite: need omega > 0");
  const double t_a = opt.arrival / omega;
  const WavePacket xi = WavePacket::gaussian(omega, t_a);
  const ChannelHierarchy h = make_fock_hierarchy(two_level::dipole(opt.gamma), xi, photons);
  std::vector<double> y = h.initial_state(two_level::ground());
  IntegratorConfig cfg;
  cfg.rtol = opt.rtol;
  cfg.atol = opt.atol;
  cfg.t_end = 2.0 * t_a;
  cfg.sample_points = opt.samples;
  cap_step(cfg, opt.gamma, omega);

  const auto w = FieldCombination::fock(photons).weights();
  std::vector<double> pe;
  pe.reserve(cfg.sample_points);
  IntegrationStats stats;
  try {
    stats = integrate(bind_rhs(h), y, cfg, [&](double, const double* s) {
      pe.push_back(excited_population(h.combine(s, w)));
      return true;
    });
  } catch (const IntegratorAbort& e) {
    throw IntegratorAbort(coordinate(photons, omega) + ": " + e.what(), e.time());
  }
  const double dt = (cfg.t_end - cfg.t_start) / static_cast<double>(cfg.sample_points - 1);
  const Peak peak = sampled_peak(pe, cfg.t_start, dt);
  ExcitePoint out;
  out.omega = omega;
  out.photons = photons;
  out.p_max = peak.value;
  out.t_peak = peak.time;
  out.steps = stats.steps;
  out.peak_at_end = peak.index + 1 == pe.size();
  return out;
}

std::vector<ExcitePoint> run_excite_sweep(const std::vector<double>& omegas,
                                          const std::vector<int>& photons,
                                          const ExciteOptions& opt) {
  std::vector<std::pair<int, double>> coords;
  for (int n : photons) {
    for (double w : omegas) coords.emplace_back(n, w);
  }
  std::sort(coords.begin(), coords.end());
  std::vector<ExcitePoint> out(coords.size());
  parallel_for(coords.size(),
               [&](std::size_t i) { out[i] = excite_point(coords[i].first, coords[i].second, opt); });
  return out;
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo)) throw InvalidInput("log_space: need 0 < lo <= hi");
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> v(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

OptimumPoint optimize_bandwidth(int photons, double lo, double hi, const ExciteOptions& opt,
                                std::size_t grid) {
  if (grid < 3) throw InvalidInput("optimize_bandwidth: grid needs >= 3 points");
  OptimumPoint out;
  out.photons = photons;
  auto eval = [&](double log_omega) {
    ++out.evaluations;
    return excite_point(photons, std::exp(log_omega), opt).p_max;
  };

  std::vector<double> xs;
  std::vector<double> ps;
  std::size_t k = 0;
  for (int widen = 0; widen < 6; ++widen) {
    xs = log_space(lo, hi, grid);
    for (double& x : xs) x = std::log(x);
    ps.clear();
    for (double x : xs) ps.push_back(eval(x));
    k = static_cast<std::size_t>(std::max_element(ps.begin(), ps.end()) - ps.begin());
    if (k != 0 && k + 1 != grid) break;
    const double span = hi / lo;
    if (k == 0) {
      hi = lo * std::sqrt(span);
      lo /= span;
    } else {
      lo = hi / std::sqrt(span);
      hi *= span;
    }
  }
  if (k == 0 || k + 1 == grid) {
    out.omega_opt = std::exp(xs[k]);
    out.p_max = ps[k];
    return out;
  }

  std::uintmax_t iters = 40;
  const auto [x_best, neg_p] = boost::math::tools::brent_find_minima(
      [&](double x) { return -eval(x); }, xs[k - 1], xs[k + 1], 20, iters);
  if (-neg_p >= ps[k]) {
    out.omega_opt = std::exp(x_best);
    out.p_max = -neg_p;
  } else {
    out.omega_opt = std::exp(xs[k]);
    out.p_max = ps[k];
  }
  return out;
}

std::vector<OptimumPoint> run_scaling_sweep(const std::vector<int>& photons,
                                            const ExciteOptions& opt) {
  std::vector<int> ns = photons;
  std::sort(ns.begin(), ns.end());
  std::vector<OptimumPoint> out(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) {
    const double guess = 1.46 * ns[i];
    out[i] = optimize_bandwidth(ns[i], 0.5 * guess, 2.0 * guess, opt);
  });
  return out;
}

const FitParameter& FitResult::param(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  throw InvalidInput("fit has no parameter " + name);
}

FitResult fit_saturation(const std::vector<double>& x, const std::vector<double>& y) {
  return fit_model(x, y, true);
}

FitResult fit_power(const std::vector<double>& x, const std::vector<double>& y) {
  return fit_model(x, y, false);
}

ScalingFits fit_scaling(const std::vector<OptimumPoint>& points) {
  std::vector<double> n;
  std::vector<double> p;
  std::vector<double> w;
  for (const auto& pt : points) {
    n.push_back(pt.photons);
    p.push_back(pt.p_max);
    w.push_back(pt.omega_opt);
  }
  return {fit_saturation(n, p), fit_power(n, w)};
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json j;
  j["model"] = fit.model;
  j["r_squared"] = fit.r_squared;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  if (!fit.diagnostics.empty()) j["diagnostics"] = fit.diagnostics;
  for (const auto& p : fit.params) {
    j["params"][p.name] = {{"value", p.value},
                           {"std_error", p.std_error},
                           {"ci95", {p.ci_low, p.ci_high}}};
  }
  return j;
}

double recursive_small_bandwidth(int photons, const WavePacket& xi, double gamma) {
  if (photons < 0) throw InvalidInput("recursion: need N >= 0");
  if (!(gamma > 0.0)) throw InvalidInput("recursion: need gamma > 0");
  const auto [lo, hi] = xi.support();
  double peak = 0.0;
  constexpr int kSamples = 20000;
  for (int i = 0; i <= kSamples; ++i) {
    peak = std::max(peak, std::norm(xi.eval(lo + (hi - lo) * i / kSamples)));
  }
  for (double b : xi.breakpoints()) {
    for (double t : {b, b - 1e-12 * (hi - lo), b + 1e-12 * (hi - lo)}) {
      if (t >= lo && t <= hi) peak = std::max(peak, std::norm(xi.eval(t)));
    }
  }
  const double p1 = 4.0 * peak / gamma;
  double p = 0.0;
  for (int n = 1; n <= photons; ++n) p = n * p1 * (1.0 - 2.0 * p);
  return p;
}

std::vector<double> strong_coupling_map(const WavePacket& xi, int photons, double tau,
                                        const std::vector<double>& t_s, double gamma_g,
                                        double gamma) {
  if (!(tau > 0.0)) throw InvalidInput("strong coupling map: need tau > 0");
  if (photons < 0) throw InvalidInput("strong coupling map: need N >= 0");
  const auto [lo, hi] = xi.support();
  const double pref = std::sqrt(photons * gamma_g) / (gamma * tau);
  const double h = std::min(xi.time_scale(), tau) / 200.0;
  std::vector<double> out;
  out.reserve(t_s.size());
  for (double ts : t_s) {
    const double a = std::max(lo, ts - 0.5 * tau);
    const double b = std::min(hi, ts + 0.5 * tau);
    if (!(b > a)) {
      out.push_back(0.0);
      continue;
    }
    out.push_back(pref * simpson([&](double t) { return std::abs(xi.eval(t)); },
                                 breakpoints_in(xi, a, b), h));
  }
  return out;
}

std::vector<double> analytic_single_photon(const WavePacket& xi, double gamma,
                                           const std::vector<double>& times) {
  if (!(gamma > 0.0)) throw InvalidInput("analytic formula: need gamma > 0");
  const auto [lo, hi] = xi.support();
  const double h = std::min(xi.time_scale(), 1.0 / gamma) / 100.0;
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const double b = std::min(t, hi);
    if (!(b > lo)) {
      out.push_back(0.0);
      continue;
    }
    const cplx amp = simpson_complex(
        [&](double s) { return xi.eval(s) * std::exp(-0.5 * gamma * (t - s)); },
        breakpoints_in(xi, lo, b), h);
    out.push_back(gamma * std::norm(amp));
  }
  return out;
}

RabiResult run_rabi_rect(int photons, double t_max, const RabiOptions& opt) {
  if (photons < 1) throw InvalidInput("rabi: need N >= 1");
  if (!(t_max > 0.0)) throw InvalidInput("rabi: need t_max > 0");
  RabiResult out;
  const WavePacket xi = WavePacket::rectangular(0.0, t_max);
  out.predicted = 2.0 / std::sqrt(t_max) * std::sqrt(opt.gamma * photons);

  const ChannelHierarchy h = make_fock_hierarchy(two_level::dipole(opt.gamma), xi, photons);
  std::vector<double> y = h.initial_state(two_level::ground());
  IntegratorConfig cfg;
  cfg.rtol = opt.rtol;
  cfg.atol = opt.atol;
  cfg.t_end = t_max;
  cfg.sample_points = opt.samples;
  cap_step(cfg, opt.gamma, std::max(1.0 / t_max, out.predicted));
  const auto w = FieldCombination::fock(photons).weights();
  out.series = integrate_record(
      bind_rhs(h), y, cfg,
      {{"p_e", [&](double, const double* s) { return excited_population(h.combine(s, w)); }}});

  const std::vector<double> t = out.series.series("t");
  const std::vector<double> p = out.series.series("p_e");
  out.p_max = *std::max_element(p.begin(), p.end());

  std::vector<std::pair<double, bool>> ext;  // (time, is maximum)
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    if (p[i] > p[i - 1] && p[i] >= p[i + 1]) ext.emplace_back(t[i], true);
    if (p[i] < p[i - 1] && p[i] <= p[i + 1]) ext.emplace_back(t[i], false);
  }
  for (const auto& e : ext) out.extrema.push_back(e.first);
  if (ext.size() >= 2) {
    const double spacing = (ext.back().first - ext.front().first) / static_cast<double>(ext.size() - 1);
    out.freq_peak = std::numbers::pi / spacing;
  }
  for (std::size_t i = 0; i < ext.size(); ++i) {
    if (!ext[i].second) continue;
    const std::size_t ki = static_cast<std::size_t>(
        std::lower_bound(t.begin(), t.end(), ext[i].first) - t.begin());
    if (p[ki] < 0.9) continue;
    for (std::size_t j = i + 1; j < ext.size(); ++j) {
      const std::size_t kj = static_cast<std::size_t>(
          std::lower_bound(t.begin(), t.end(), ext[j].first) - t.begin());
      if (!ext[j].second && p[kj] <= 0.1) out.full_oscillation = true;
    }
  }

  // Starting frequency from inverting sin^2(w t / 2) at the first sample above 5%.
  std::size_t k0 = p.size() - 1;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] >= 0.05) {
      k0 = i;
      break;
    }
  }
  const double w0 = 2.0 * std::asin(std::sqrt(std::clamp(p[k0], 0.0, 1.0))) / t[k0];
  auto ssr = [&](double omega) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double m = std::sin(0.5 * omega * t[i]);
      s += (p[i] - m * m) * (p[i] - m * m);
    }
    return s;
  };
  std::uintmax_t iters = 100;
  out.freq_fit = boost::math::tools::brent_find_minima(ssr, 0.5 * w0, 1.5 * w0, 40, iters).first;
  return out;
}

std::vector<ScatterPoint> run_scatter_sweep(const std::vector<double>& omegas,
                                            const std::vector<int>& photons,
                                            const ScatterOptions& opt) {
  std::vector<std::pair<int, double>> coords;
  for (int n : photons) {
    for (double w : omegas) coords.emplace_back(n, w);
  }
  std::sort(coords.begin(), coords.end());
  std::vector<ScatterPoint> out(coords.size());
  const MultiModeSLH slh = scattering_preset();
  parallel_for(coords.size(), [&](std::size_t i) {
    const auto [n, omega] = coords[i];
    if (n < 1) throw InvalidInput("scatter: need N >= 1");
    if (!(omega > 0.0)) throw InvalidInput("scatter: need omega > 0");
    const WavePacket xi = WavePacket::gaussian(omega, 8.0 / omega);
    const ChannelHierarchy h =
        make_twomode_hierarchy(slh, xi, xi, n, 0, {OutputSpec::flux(0), OutputSpec::flux(1)});
    std::vector<double> y = h.initial_state(two_level::ground());
    IntegratorConfig cfg;
    cfg.rtol = opt.rtol;
    cfg.atol = opt.atol;
    cfg.t_end = 16.0 / omega + opt.tail;
    cfg.sample_points = 2;
    cap_step(cfg, dominant_decay_rate(slh), omega);
    try {
      integrate(bind_rhs(h), y, cfg);
    } catch (const IntegratorAbort& e) {
      throw IntegratorAbort(coordinate(n, omega) + ": " + e.what(), e.time());
    }
    const auto w = TwoModeCombination::fock(n, 0).weights(h);
    out[i] = {omega, n, h.combine_output(y.data(), 0, w).real() / n,
              h.combine_output(y.data(), 1, w).real() / n};
  });
  return out;
}

EngineSetup build_engine(const MultiModeSLH& slh, const FieldSpec& field,
                         std::vector<OutputSpec> outputs) {
  return std::visit(
      overloaded{
          [&](const FockField& f) {
            if (slh.modes() != 1) throw InvalidInput("Fock field needs a single-mode system");
            f.combo.validate();
            std::vector<OccupationLabel> labels;
            for (int n = 0; n <= f.combo.max_photons(); ++n) labels.push_back({n});
            ChannelHierarchy h(slh, {Channel{0, f.xi}}, std::move(labels), std::move(outputs));
            return EngineSetup{std::move(h), f.combo.weights()};
          },
          [&](const NPacketField& f) {
            if (slh.modes() != 1) throw InvalidInput("N-packet field needs a single-mode system");
            const SLHTriple single{slh.s[0][0], slh.l[0], slh.h};
            ChannelHierarchy h = make_npacket_hierarchy(single, f.spec, std::move(outputs));
            auto w = npacket_weights(h, f.spec);
            return EngineSetup{std::move(h), std::move(w)};
          },
          [&](const TwoModeField& f) {
            f.combo.validate();
            int n_max = 0;
            int q_max = 0;
            for (const auto& [idx, c] : f.combo.coeffs) {
              n_max = std::max({n_max, idx[0], idx[1]});
              q_max = std::max({q_max, idx[2], idx[3]});
            }
            ChannelHierarchy h =
                make_twomode_hierarchy(slh, f.xi, f.eta, n_max, q_max, std::move(outputs));
            auto w = f.combo.weights(h);
            return EngineSetup{std::move(h), std::move(w)};
          },
      },
      field);
}

TimeSeriesRecord run_single(const SingleRunConfig& cfg, IntegrationStats* stats) {
  cfg.slh.validate();
  if (cfg.projector.dim() != cfg.slh.dim()) throw InvalidInput("projector: dimension mismatch");
  std::vector<OutputSpec> outputs;
  for (std::size_t j = 0; j < cfg.slh.modes(); ++j) {
    outputs.push_back(OutputSpec::flux(j));
    outputs.push_back(OutputSpec::quadrature(j, cfg.phi));
  }
  const bool cross = cfg.cross_flux && cfg.slh.modes() == 2;
  if (cfg.cross_flux && !cross) throw InvalidInput("cross flux needs a two-mode system");
  if (cross) {
    outputs.push_back(OutputSpec::cross_flux(0, 1));
    outputs.push_back(OutputSpec::cross_flux(1, 0));
  }
  const EngineSetup e = build_engine(cfg.slh, cfg.field, outputs);
  const ChannelHierarchy& h = e.hierarchy;
  const auto& w = e.weights;
  std::vector<double> y = h.initial_state(cfg.rho0);

  std::vector<Probe> probes;
  probes.push_back({"p_e", [&](double, const double* s) {
                      return expectation(h.combine(s, w), cfg.projector).real();
                    }});
  for (std::size_t j = 0; j < cfg.slh.modes(); ++j) {
    const std::string tag = std::to_string(j + 1);
    const std::size_t fo = 2 * j;
    const std::size_t qo = 2 * j + 1;
    probes.push_back({"flux_rate_" + tag, [&h, &w, fo](double t, const double* s) {
                        return h.combine_output_rate(t, s, fo, w).real();
                      }});
    probes.push_back({"flux_" + tag, [&h, &w, fo](double, const double* s) {
                        return h.combine_output(s, fo, w).real();
                      }});
    probes.push_back({"quad_" + tag, [&h, &w, qo](double, const double* s) {
                        return h.combine_output(s, qo, w).real();
                      }});
  }
  if (cross) {
    for (const auto& [name, obs] : {std::pair{"cross_flux_12", std::size_t{4}}, {"cross_flux_21", 5}}) {
      const std::string base = name;
      probes.push_back({base + "_re", [&h, &w, obs](double, const double* s) {
                          return h.combine_output(s, obs, w).real();
                        }});
      probes.push_back({base + "_im", [&h, &w, obs](double, const double* s) {
                          return h.combine_output(s, obs, w).imag();
                        }});
    }
  }
  return integrate_record(bind_rhs(h), y, cfg.integrator, probes, stats);
}

OracleCheckResult run_oracle_check(int photons, double omega, std::size_t bins,
                                   std::size_t samples, double arrival) {
  if (photons < 1) throw InvalidInput("oracle check: need N >= 1");
  const SLHTriple slh = two_level::dipole(1.0);
  const double t_a = arrival / omega;
  const double t_end = 2.0 * t_a;
  const WavePacket xi = WavePacket::gaussian(omega, t_a);

  TimeBinConfig tc;
  tc.bins = bins;
  tc.dt_bin = t_end / static_cast<double>(bins);
  tc.n_total_max = photons;
  tc.samples = samples;
  NPhotonSpec spec;
  spec.basis.packets = {xi};
  spec.amplitudes[IndexTuple(static_cast<std::size_t>(photons), 0)] = 1.0;
  tc.input = {{1.0, spec}};
  const OracleResult oracle = run_timebin_oracle(slh, tc);

  const ChannelHierarchy h = make_fock_hierarchy(
      slh, xi, photons, {OutputSpec::flux(0), OutputSpec::quadrature(0, 0.0)});
  std::vector<double> y = h.initial_state(two_level::ground());
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  cfg.sample_points = samples + 1;
  cap_step(cfg, 1.0, omega);
  const auto w = FieldCombination::fock(photons).weights();

  OracleCheckResult out;
  std::size_t i = 0;
  integrate(bind_rhs(h), y, cfg, [&](double t, const double* s) {
    if (i > 0) {
      const Operator rho = h.combine(s, w);
      const OracleSample& o = oracle.samples.at(i - 1);
      const double td = trace_distance(rho, o.rho);
      out.points.push_back({t, td, excited_population(rho), o.p_e,
                            h.combine_output(s, 0, w).real(), o.flux_integrated,
                            h.combine_output(s, 1, w).real(), o.quad_integrated});
      out.worst = std::max(out.worst, td);
    }
    ++i;
    return true;
  });
  return out;
}

}  // namespace fockme
