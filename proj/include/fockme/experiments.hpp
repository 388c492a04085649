#pragma once

// Two-level-atom studies driven by Fock and N-photon wave packets: excitation
// sweeps and bandwidth optimization, scaling fits, Rabi oscillations for
// rectangular pulses, waveguide scattering and generic single runs.
// Rates are in units of Gamma (Gamma = 1 unless stated otherwise).

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fockme/fock_hierarchy.hpp"
#include "fockme/integrator.hpp"
#include "fockme/npacket.hpp"
#include "fockme/twomode.hpp"

namespace fockme {

struct ExciteOptions {
  double gamma = 1.0;
  double rtol = 1e-8;
  double atol = 1e-10;
  std::size_t samples = 1601;
  /// Gaussian peak at t_a = arrival / omega; the run covers [0, 2 t_a].
  double arrival = 8.0;
};

struct ExcitePoint {
  double omega = 0.0;
  int photons = 0;
  double p_max = 0.0;
  double t_peak = 0.0;
  std::size_t steps = 0;
  bool peak_at_end = false;  // maximum on the last sample: the window was too short
};

/// max_t P_e for an N-photon Gaussian of bandwidth omega, atom initially in |g>.
ExcitePoint excite_point(int photons, double omega, const ExciteOptions& opt = {});

/// All (omega, N) combinations, evaluated in parallel and sorted by (N, omega).
std::vector<ExcitePoint> run_excite_sweep(const std::vector<double>& omegas,
                                          const std::vector<int>& photons,
                                          const ExciteOptions& opt = {});

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, std::size_t n);

struct OptimumPoint {
  int photons = 0;
  double omega_opt = 0.0;
  double p_max = 0.0;
  int evaluations = 0;
};

/// Grid scan of log(omega) over [lo, hi] followed by a Brent refinement
/// around the best grid point. The grid is widened if the maximum sits on an edge.
OptimumPoint optimize_bandwidth(int photons, double lo, double hi, const ExciteOptions& opt = {},
                                std::size_t grid = 9);

/// optimize_bandwidth for every N with the bracket [0.5, 2] x 1.46 N.
std::vector<OptimumPoint> run_scaling_sweep(const std::vector<int>& photons,
                                            const ExciteOptions& opt = {});

struct FitParameter {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;  // 95% confidence interval
  double ci_high = 0.0;
};

struct FitResult {
  std::string model;
  std::vector<FitParameter> params;
  double r_squared = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string diagnostics;

  const FitParameter& param(const std::string& name) const;
};

/// y = 1 - a x^(-b)
FitResult fit_saturation(const std::vector<double>& x, const std::vector<double>& y);
/// y = a x^b
FitResult fit_power(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingFits {
  FitResult p_max;      // saturation model on max P_e
  FitResult omega_opt;  // power model on the optimal bandwidth
};
ScalingFits fit_scaling(const std::vector<OptimumPoint>& points);

nlohmann::json to_json(const FitResult& fit);

/// Small-bandwidth recursion P_N = N P_1 (1 - 2 P_{N-1}), P_1 = 4 max|xi|^2 / gamma, P_0 = 0.
double recursive_small_bandwidth(int photons, const WavePacket& xi, double gamma = 1.0);

/// (sqrt(N gamma_g) / (gamma tau)) * integral of |xi| over [t_s - tau/2, t_s + tau/2].
std::vector<double> strong_coupling_map(const WavePacket& xi, int photons, double tau,
                                        const std::vector<double>& t_s, double gamma_g = 1.0,
                                        double gamma = 1.0);

/// Single-photon excitation of a two-level atom with decay rate gamma:
/// gamma |integral_{-inf}^t xi(s) exp(-gamma (t - s) / 2) ds|^2, by direct quadrature.
std::vector<double> analytic_single_photon(const WavePacket& xi, double gamma,
                                           const std::vector<double>& times);

struct RabiOptions {
  double gamma = 1.0;
  std::size_t samples = 401;
  double rtol = 1e-9;
  double atol = 1e-11;
};

struct RabiResult {
  TimeSeriesRecord series;       // t, p_e over the pulse
  std::vector<double> extrema;   // times of interior local extrema of P_e
  std::optional<double> freq_peak;  // pi / mean extremum spacing, when >= 2 extrema
  double freq_fit = 0.0;          // least-squares fit of sin^2(w t / 2)
  double predicted = 0.0;         // 2 xi sqrt(gamma N)
  double p_max = 0.0;
  bool full_oscillation = false;  // a maximum >= 0.9 followed by a minimum <= 0.1
};

/// N photons in a rectangular pulse of length t_max starting at t = 0.
RabiResult run_rabi_rect(int photons, double t_max, const RabiOptions& opt = {});

struct ScatterOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  /// Time allowed for the atom to decay after the packet has passed.
  double tail = 20.0;
};

struct ScatterPoint {
  double omega = 0.0;
  int photons = 0;
  double transmission = 0.0;
  double reflection = 0.0;
};

/// Gaussian N-photon packet sent into mode 1 of the waveguide preset;
/// transmission = E[Lambda_11]/N and reflection = E[Lambda_22]/N after the run.
std::vector<ScatterPoint> run_scatter_sweep(const std::vector<double>& omegas,
                                            const std::vector<int>& photons,
                                            const ScatterOptions& opt = {});

/// Field feeding a single-mode system through one packet.
struct FockField {
  WavePacket xi;
  FieldCombination combo;
};
struct NPacketField {
  NPhotonSpec spec;
};
/// Packets xi (mode 1) and eta (mode 2).
struct TwoModeField {
  WavePacket xi;
  WavePacket eta;
  TwoModeCombination combo;
};
using FieldSpec = std::variant<FockField, NPacketField, TwoModeField>;

struct SingleRunConfig {
  MultiModeSLH slh;
  Operator rho0;
  Operator projector;  // P_e column
  FieldSpec field;
  IntegratorConfig integrator;
  double phi = 0.0;
  bool cross_flux = false;  // two-mode only: also track E[Lambda_12] and E[Lambda_21]
};

struct EngineSetup {
  ChannelHierarchy hierarchy;
  std::vector<PairWeight> weights;
};

/// Hierarchy and combination weights for a field; outputs are passed through.
EngineSetup build_engine(const MultiModeSLH& slh, const FieldSpec& field,
                         std::vector<OutputSpec> outputs);

/// Columns: t, p_e, then per mode j (1-based): flux_rate_j, flux_j, quad_j; with
/// cross_flux also cross_flux_12_re, cross_flux_12_im, cross_flux_21_re, cross_flux_21_im.
TimeSeriesRecord run_single(const SingleRunConfig& cfg, IntegrationStats* stats = nullptr);

struct OracleCheckPoint {
  double time = 0.0;
  double trace_distance = 0.0;
  double p_e_hierarchy = 0.0;
  double p_e_oracle = 0.0;
  double flux_hierarchy = 0.0;
  double flux_oracle = 0.0;
  double quad_hierarchy = 0.0;  // phase 0
  double quad_oracle = 0.0;
};

struct OracleCheckResult {
  std::vector<OracleCheckPoint> points;
  double worst = 0.0;
};

/// N-photon Gaussian on a dipole(1) atom: hierarchy vs time-bin oracle with
/// `bins` bins over [0, 2 arrival/omega], compared at `samples` times.
OracleCheckResult run_oracle_check(int photons, double omega, std::size_t bins,
                                   std::size_t samples = 10, double arrival = 8.0);

}  // namespace fockme
