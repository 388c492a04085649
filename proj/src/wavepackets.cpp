#include "fockme/wavepackets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "fockme/errors.hpp"

namespace fockme {

namespace {

constexpr double kGaussianWidths = 8.0;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

WavePacket WavePacket::gaussian(double omega, double t_a, double detuning) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidInput("gaussian: omega must be > 0");
  if (!std::isfinite(t_a)) throw InvalidInput("gaussian: t_a must be finite");
  return WavePacket(GaussianShape{omega, t_a}, detuning);
}

WavePacket WavePacket::rectangular(double t0, double t_max, double detuning) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw InvalidInput("rectangular: t_max must be > 0");
  }
  return WavePacket(RectangularShape{t0, t_max}, detuning);
}

WavePacket WavePacket::sampled(double t0, double dt, std::vector<cplx> values, double detuning) {
  if (!(dt > 0.0)) throw InvalidInput("sampled: grid spacing must be > 0");
  if (values.size() < 2) throw InvalidInput("sampled: need at least two grid points");
  return WavePacket(SampledShape{t0, dt, std::move(values)}, detuning);
}

WavePacket WavePacket::superposition(const std::vector<std::pair<cplx, WavePacket>>& terms) {
  if (terms.empty()) throw InvalidInput("superposition: no terms");
  SuperpositionShape shape;
  for (const auto& [w, p] : terms) {
    shape.terms.emplace_back(w, std::make_shared<const WavePacket>(p));
  }
  return WavePacket(std::move(shape), 0.0);
}

WavePacket::Kind WavePacket::kind() const noexcept {
  return std::visit(overloaded{[](const GaussianShape&) { return Kind::Gaussian; },
                               [](const RectangularShape&) { return Kind::Rectangular; },
                               [](const SampledShape&) { return Kind::Sampled; },
                               [](const SuperpositionShape&) { return Kind::Superposition; }},
                    shape_);
}

cplx WavePacket::shape_value(double t) const {
  return std::visit(
      overloaded{
          [t](const GaussianShape& g) -> cplx {
            const double x = t - g.t_a;
            if (std::abs(x) > kGaussianWidths / g.omega) return 0.0;
            const double norm = std::pow(g.omega * g.omega / (2.0 * std::numbers::pi), 0.25);
            return norm * std::exp(-0.25 * g.omega * g.omega * x * x);
          },
          [t](const RectangularShape& r) -> cplx {
            if (t < r.t0 || t > r.t0 + r.t_max) return 0.0;
            return 1.0 / std::sqrt(r.t_max);
          },
          [t](const SampledShape& s) -> cplx {
            const double u = (t - s.t0) / s.dt;
            const auto last = static_cast<double>(s.values.size() - 1);
            if (!(u >= 0.0) || u > last) return 0.0;
            const auto i = std::min(static_cast<std::size_t>(u), s.values.size() - 2);
            const double frac = u - static_cast<double>(i);
            return s.values[i] + frac * (s.values[i + 1] - s.values[i]);
          },
          [t](const SuperpositionShape& s) -> cplx {
            cplx acc{};
            for (const auto& [w, p] : s.terms) acc += w * p->eval(t);
            return acc;
          }},
      shape_);
}

cplx WavePacket::eval(double t) const {
  const cplx v = scale_ * shape_value(t);
  if (detuning_ == 0.0 || v == cplx{}) return v;
  return v * std::polar(1.0, -detuning_ * t);
}

std::pair<double, double> WavePacket::support() const {
  return std::visit(
      overloaded{[](const GaussianShape& g) {
                   return std::pair{g.t_a - kGaussianWidths / g.omega,
                                    g.t_a + kGaussianWidths / g.omega};
                 },
                 [](const RectangularShape& r) { return std::pair{r.t0, r.t0 + r.t_max}; },
                 [](const SampledShape& s) {
                   return std::pair{s.t0, s.t0 + s.dt * static_cast<double>(s.values.size() - 1)};
                 },
                 [](const SuperpositionShape& s) {
                   auto lo = s.terms.front().second->support();
                   for (const auto& term : s.terms) {
                     const auto sp = term.second->support();
                     lo.first = std::min(lo.first, sp.first);
                     lo.second = std::max(lo.second, sp.second);
                   }
                   return lo;
                 }},
      shape_);
}

std::vector<double> WavePacket::breakpoints() const {
  return std::visit(
      overloaded{[this](const GaussianShape& g) {
                   const auto [a, b] = support();
                   return std::vector<double>{a, g.t_a, b};
                 },
                 [](const RectangularShape& r) { return std::vector<double>{r.t0, r.t0 + r.t_max}; },
                 [](const SampledShape& s) {
                   std::vector<double> pts(s.values.size());
                   for (std::size_t i = 0; i < pts.size(); ++i) {
                     pts[i] = s.t0 + s.dt * static_cast<double>(i);
                   }
                   return pts;
                 },
                 [](const SuperpositionShape& s) {
                   std::vector<double> pts;
                   for (const auto& term : s.terms) {
                     const auto sub = term.second->breakpoints();
                     pts.insert(pts.end(), sub.begin(), sub.end());
                   }
                   return pts;
                 }},
      shape_);
}

double WavePacket::time_scale() const {
  return std::visit(overloaded{[](const GaussianShape& g) { return 1.0 / g.omega; },
                               [](const RectangularShape& r) { return r.t_max; },
                               [](const SampledShape& s) { return s.dt; },
                               [](const SuperpositionShape& s) {
                                 double ts = s.terms.front().second->time_scale();
                                 for (const auto& term : s.terms) {
                                   ts = std::min(ts, term.second->time_scale());
                                 }
                                 return ts;
                               }},
                    shape_);
}

WavePacket WavePacket::scaled(cplx factor) const {
  WavePacket copy = *this;
  copy.scale_ *= factor;
  return copy;
}

double simpson(const std::function<double(double)>& f, std::vector<double> breakpoints,
               double h_max) {
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s) {
    const double a = breakpoints[s];
    const double b = breakpoints[s + 1];
    auto n = static_cast<std::size_t>(std::ceil((b - a) / h_max));
    n = std::max<std::size_t>(2, n + (n % 2));
    const double h = (b - a) / static_cast<double>(n);
    // Evaluate strictly inside the segment at its ends so that one-sided limits
    // are used at jump discontinuities.
    const double eps = 1e-12 * std::max(1.0, std::abs(b - a));
    double acc = f(a + eps) + f(b - eps);
    for (std::size_t i = 1; i < n; ++i) {
      acc += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    }
    total += acc * h / 3.0;
  }
  return total;
}

namespace {

double quadrature_step(const std::vector<const WavePacket*>& packets) {
  double step = packets.front()->time_scale();
  for (const auto* p : packets) step = std::min(step, p->time_scale());
  return step / 50.0;
}

}  // namespace

double norm_check(const WavePacket& packet) {
  if (const auto* s = packet.as_sampled()) {
    // |linear interpolant|^2 is quadratic per cell; integrate it exactly.
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < s->values.size(); ++i) {
      const cplx a = s->values[i];
      const cplx b = s->values[i + 1];
      total += s->dt * (std::norm(a) + std::norm(b) + std::real(a * std::conj(b))) / 3.0;
    }
    return total * std::norm(packet.scale());
  }
  const auto f = [&packet](double t) { return std::norm(packet.eval(t)); };
  return simpson(f, packet.breakpoints(), quadrature_step({&packet}));
}

Eigen::MatrixXcd gram_matrix(const BasisSet& basis) {
  if (basis.packets.empty()) throw InvalidInput("gram_matrix: empty basis");
  const std::size_t k = basis.packets.size();
  std::vector<const WavePacket*> ptrs;
  std::vector<double> bps;
  for (const auto& p : basis.packets) {
    ptrs.push_back(&p);
    const auto b = p.breakpoints();
    bps.insert(bps.end(), b.begin(), b.end());
  }
  const double h = quadrature_step(ptrs);
  Eigen::MatrixXcd g(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const auto& a = basis.packets[i];
      const auto& b = basis.packets[j];
      const double re = simpson([&](double t) { return std::real(std::conj(a.eval(t)) * b.eval(t)); },
                                bps, h);
      const double im = simpson([&](double t) { return std::imag(std::conj(a.eval(t)) * b.eval(t)); },
                                bps, h);
      g(i, j) = cplx(re, im);
      g(j, i) = std::conj(g(i, j));
    }
  }
  return g;
}

double orthonormality_defect(const BasisSet& basis) {
  const Eigen::MatrixXcd g = gram_matrix(basis);
  return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

WavePacket load_sampled_csv(const std::filesystem::path& path, double detuning) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open packet file " + path.string());
  std::vector<double> times;
  std::vector<cplx> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double t = 0.0;
    double re = 0.0;
    double im = 0.0;
    if (!(ss >> t)) continue;  // header row
    if (!(ss >> re)) throw InvalidInput(path.string() + ": row needs time and real part");
    if (!(ss >> im)) im = 0.0;
    times.push_back(t);
    values.emplace_back(re, im);
  }
  if (times.size() < 2) throw InvalidInput(path.string() + ": need at least two samples");
  const double dt = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw InvalidInput(path.string() + ": time grid is not uniform");
    }
  }
  return WavePacket::sampled(times.front(), dt, std::move(values), detuning);
}

namespace {

double number_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw InvalidInput(std::string("packet: missing numeric \"") + key + "\"");
  }
  return j[key].get<double>();
}

}  // namespace

WavePacket packet_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw InvalidInput("packet: missing \"kind\"");
  }
  const auto kind = j["kind"].get<std::string>();
  const double detuning = j.contains("detuning") ? number_field(j, "detuning") : 0.0;
  if (kind == "gaussian") {
    const double omega = number_field(j, "omega");
    const double t_a = j.contains("t_a") ? number_field(j, "t_a") : kGaussianWidths / omega;
    return WavePacket::gaussian(omega, t_a, detuning);
  }
  if (kind == "rectangular") {
    const double t0 = j.contains("t0") ? number_field(j, "t0") : 0.0;
    return WavePacket::rectangular(t0, number_field(j, "t_max"), detuning);
  }
  if (kind == "sampled") {
    if (j.contains("file")) {
      if (!j["file"].is_string()) throw InvalidInput("packet: \"file\" must be a string");
      std::filesystem::path p = j["file"].get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      return load_sampled_csv(p, detuning);
    }
    if (!j.contains("values") || !j["values"].is_array()) {
      throw InvalidInput("packet: sampled needs \"file\" or \"values\"");
    }
    std::vector<cplx> values;
    for (const auto& v : j["values"]) {
      if (v.is_number()) {
        values.emplace_back(v.get<double>(), 0.0);
      } else if (v.is_array() && v.size() == 2) {
        values.emplace_back(v[0].get<double>(), v[1].get<double>());
      } else {
        throw InvalidInput("packet: sampled values must be numbers or [re, im]");
      }
    }
    return WavePacket::sampled(number_field(j, "t0"), number_field(j, "dt"), std::move(values),
                               detuning);
  }
  throw InvalidInput("packet: unknown kind \"" + kind + "\"");
}

}  // namespace fockme
