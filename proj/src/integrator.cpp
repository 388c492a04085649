#include "fockme/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "fockme/errors.hpp"
#include "fockme/simd/kernels.hpp"

namespace fockme {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

[[noreturn]] void abort_at(const std::string& why, double t) {
  std::ostringstream os;
  os << why << " at t=" << t;
  throw IntegratorAbort(os.str(), t);
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidInput("integrator: rtol and atol must be > 0");
  if (!(dt_min > 0.0) || !(dt_min <= dt_init) || !(dt_init <= dt_max)) {
    throw InvalidInput("integrator: need 0 < dt_min <= dt_init <= dt_max");
  }
  if (!(t_start < t_end) || !std::isfinite(t_start) || !std::isfinite(t_end)) {
    throw InvalidInput("integrator: need finite t_start < t_end");
  }
  if (sample_points < 2) throw InvalidInput("integrator: need at least 2 sample points");
}

double IntegratorConfig::sample_time(std::size_t i) const {
  if (i + 1 >= sample_points) return t_end;
  return t_start + (t_end - t_start) * static_cast<double>(i) / static_cast<double>(sample_points - 1);
}

void cap_step(IntegratorConfig& cfg, double gamma, double omega) {
  double scale = std::numeric_limits<double>::infinity();
  if (gamma > 0.0) scale = std::min(scale, 1.0 / gamma);
  if (omega > 0.0) scale = std::min(scale, 1.0 / omega);
  if (std::isfinite(scale)) {
    cfg.dt_max = std::min(cfg.dt_max, 0.05 * scale);
    cfg.dt_init = std::min(cfg.dt_init, cfg.dt_max);
    cfg.dt_min = std::min(cfg.dt_min, cfg.dt_init);
  }
}

IntegrationStats integrate(const RhsFunction& rhs, std::vector<double>& y,
                           const IntegratorConfig& cfg, const Observer& observer) {
  cfg.validate();
  if (!all_finite(y)) abort_at("non-finite initial state", cfg.t_start);
  const auto& kt = simd::active();
  const std::size_t n = y.size();
  IntegrationStats stats;
  double t = cfg.t_start;
  const double snap = 1e-12 * std::max(1.0, std::abs(cfg.t_end - cfg.t_start));

  auto observe = [&](double ts) {
    ++stats.samples;
    if (observer && !observer(ts, y.data())) {
      stats.stopped_early = true;
      return false;
    }
    return true;
  };

  std::array<std::vector<double>, 7> k;
  for (auto& v : k) v.assign(n, 0.0);
  std::vector<double> tmp(n), y1(n), err(n);

  if (!observe(t)) {
    stats.t_final = t;
    return stats;
  }

  if (cfg.method == Method::Rk4Fixed) {
    for (std::size_t s = 1; s < cfg.sample_points; ++s) {
      const double target = cfg.sample_time(s);
      while (target - t > snap) {
        const double h = std::min(cfg.dt_init, target - t);
        rhs(t, y.data(), k[0].data());
        kt.lincomb(tmp.data(), y.data(), n, 0.5 * h, std::array{1.0}.data(),
                   std::array<const double*, 1>{k[0].data()}.data(), 1);
        rhs(t + 0.5 * h, tmp.data(), k[1].data());
        kt.lincomb(tmp.data(), y.data(), n, 0.5 * h, std::array{1.0}.data(),
                   std::array<const double*, 1>{k[1].data()}.data(), 1);
        rhs(t + 0.5 * h, tmp.data(), k[2].data());
        kt.lincomb(tmp.data(), y.data(), n, h, std::array{1.0}.data(),
                   std::array<const double*, 1>{k[2].data()}.data(), 1);
        rhs(t + h, tmp.data(), k[3].data());
        const std::array coeffs{1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6};
        const std::array<const double*, 4> vecs{k[0].data(), k[1].data(), k[2].data(), k[3].data()};
        kt.lincomb(y.data(), y.data(), n, h, coeffs.data(), vecs.data(), 4);
        stats.rhs_evals += 4;
        ++stats.steps;
        t = (target - (t + h) <= snap) ? target : t + h;
        if (!all_finite(y)) abort_at("non-finite state", t);
      }
      t = target;
      if (!observe(t)) break;
    }
    stats.t_final = t;
    return stats;
  }

  double h = std::min(cfg.dt_init, cfg.dt_max);
  rhs(t, y.data(), k[0].data());
  ++stats.rhs_evals;
  for (std::size_t s = 1; s < cfg.sample_points; ++s) {
    const double target = cfg.sample_time(s);
    while (target - t > snap) {
      const bool clamped = t + h >= target;
      const double step = clamped ? target - t : h;

      auto stage = [&](std::size_t out, double ct, std::initializer_list<double> a) {
        const std::array<const double*, 6> vecs{k[0].data(), k[1].data(), k[2].data(),
                                                k[3].data(), k[4].data(), k[5].data()};
        kt.lincomb(tmp.data(), y.data(), n, step, a.begin(), vecs.data(), a.size());
        rhs(t + ct * step, tmp.data(), k[out].data());
      };
      stage(1, c2, {a21});
      stage(2, c3, {a31, a32});
      stage(3, c4, {a41, a42, a43});
      stage(4, c5, {a51, a52, a53, a54});
      stage(5, 1.0, {a61, a62, a63, a64, a65});
      {
        const std::array coeffs{b1, 0.0, b3, b4, b5, b6};
        const std::array<const double*, 6> vecs{k[0].data(), k[1].data(), k[2].data(),
                                                k[3].data(), k[4].data(), k[5].data()};
        kt.lincomb(y1.data(), y.data(), n, step, coeffs.data(), vecs.data(), 6);
      }
      rhs(t + step, y1.data(), k[6].data());
      stats.rhs_evals += 6;
      {
        const std::array coeffs{e1, 0.0, e3, e4, e5, e6, e7};
        const std::array<const double*, 7> vecs{k[0].data(), k[1].data(), k[2].data(), k[3].data(),
                                                k[4].data(), k[5].data(), k[6].data()};
        std::fill(err.begin(), err.end(), 0.0);
        kt.lincomb(err.data(), err.data(), n, step, coeffs.data(), vecs.data(), 7);
      }
      const double ratio = kt.error_ratio(err.data(), y.data(), y1.data(), n, cfg.atol, cfg.rtol);
      if (!std::isfinite(ratio)) abort_at("non-finite state", t);

      const double factor =
          ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
      if (ratio <= 1.0) {
        ++stats.steps;
        t = clamped ? target : t + step;
        y.swap(y1);
        k[0].swap(k[6]);
        // A step shortened to land on a sample time says nothing about the natural size.
        if (!clamped || step >= h) h = std::min(step * factor, cfg.dt_max);
      } else {
        ++stats.rejected;
        h = step * std::max(factor, 0.2);
        if (h < cfg.dt_min) abort_at("step size underflow (dt < dt_min)", t);
      }
    }
    t = target;
    if (!observe(t)) break;
  }
  stats.t_final = t;
  return stats;
}

std::size_t TimeSeriesRecord::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InvalidInput("no column named " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> TimeSeriesRecord::series(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

TimeSeriesRecord integrate_record(const RhsFunction& rhs, std::vector<double>& y,
                                  const IntegratorConfig& cfg, const std::vector<Probe>& probes,
                                  IntegrationStats* stats) {
  TimeSeriesRecord rec;
  rec.columns.push_back("t");
  for (const auto& p : probes) rec.columns.push_back(p.name);
  rec.rows.reserve(cfg.sample_points);
  const auto s = integrate(rhs, y, cfg, [&](double t, const double* state) {
    std::vector<double> row;
    row.reserve(probes.size() + 1);
    row.push_back(t);
    for (const auto& p : probes) row.push_back(p.eval(t, state));
    rec.rows.push_back(std::move(row));
    return true;
  });
  if (stats != nullptr) *stats = s;
  return rec;
}

}  // namespace fockme
