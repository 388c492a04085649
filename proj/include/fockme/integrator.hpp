#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace fockme {

enum class Method { Rk4Fixed, Rk45Adaptive };

struct IntegratorConfig {
  Method method = Method::Rk45Adaptive;
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_init = 1e-3;
  double dt_max = std::numeric_limits<double>::infinity();
  double dt_min = 1e-14;
  double t_start = 0.0;
  double t_end = 1.0;
  std::size_t sample_points = 201;

  /// Throws InvalidInput when the invariants 0 < dt_min <= dt_init <= dt_max,
  /// rtol, atol > 0, t_start < t_end or sample_points >= 2 are violated.
  void validate() const;
  /// i-th of the uniformly spaced sample times (endpoints included).
  double sample_time(std::size_t i) const;
};

/// Caps dt_max at 0.05 * min(1/gamma, 1/omega); zero rates are ignored.
void cap_step(IntegratorConfig& cfg, double gamma, double omega);

/// dy/dt = f(t, y) on flat real vectors of a fixed length.
using RhsFunction = std::function<void(double t, const double* y, double* dy)>;
/// Called at each sample time; return false to stop integrating.
using Observer = std::function<bool(double t, const double* y)>;

struct IntegrationStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  std::size_t samples = 0;
  double t_final = 0.0;
  bool stopped_early = false;
};

/// Integrates y from cfg.t_start to cfg.t_end in place, invoking `observer` at
/// every sample time. Throws IntegratorAbort on step underflow or a non-finite state.
IntegrationStats integrate(const RhsFunction& rhs, std::vector<double>& y,
                           const IntegratorConfig& cfg, const Observer& observer = {});

/// Sampled scalar observables: one row per sample time, first column "t".
struct TimeSeriesRecord {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
  std::vector<double> series(const std::string& name) const;
};

struct Probe {
  std::string name;
  std::function<double(double t, const double* y)> eval;
};

TimeSeriesRecord integrate_record(const RhsFunction& rhs, std::vector<double>& y,
                                  const IntegratorConfig& cfg, const std::vector<Probe>& probes,
                                  IntegrationStats* stats = nullptr);

}  // namespace fockme
