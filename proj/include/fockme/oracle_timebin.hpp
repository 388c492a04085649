#pragma once

// Brute-force collision-model reference for a two-level emitter.
//
// The field is cut into B time bins of width dt; bin k interacts with the atom
// during [t_start + k dt, t_start + (k+1) dt) through
//   U_k = exp(sqrt(gamma dt) (sigma_- b_k^dag - sigma_+ b_k) - i H dt)
// and then leaves. Only states with a fixed total excitation number are
// stored: |g, R> with |R| = E photons and |e, R> with |R| = E - 1, where R is a
// multiset of occupied bins.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fockme/npacket.hpp"
#include "fockme/operators.hpp"

namespace fockme {

struct OracleInputComponent {
  cplx amplitude;
  NPhotonSpec field;  // photon number N, packets sampled at bin midpoints
};

struct TimeBinConfig {
  std::size_t bins = 2000;
  double t_start = 0.0;
  double dt_bin = 1e-2;
  int n_total_max = 3;
  /// Coherent superposition of field states; amplitudes should have unit norm.
  std::vector<OracleInputComponent> input;
  cplx atom_ground = 1.0;
  cplx atom_excited = 0.0;
  double phi = 0.0;
  std::size_t samples = 10;

  void validate() const;
};

/// Amplitudes of one excitation sector: g-part over multisets of size E,
/// e-part over multisets of size E - 1.
struct Sector {
  int excitations = 0;
  std::vector<cplx> ground;
  std::vector<cplx> excited;
};

class SectorState {
 public:
  SectorState(std::size_t bins, int n_total_max);

  std::size_t bins() const noexcept { return bins_; }
  int n_total_max() const noexcept { return n_max_; }
  std::vector<Sector>& sectors() noexcept { return sectors_; }
  const std::vector<Sector>& sectors() const noexcept { return sectors_; }

  /// Number of multisets of size n over the bins.
  std::uint64_t multiset_count(int n) const;
  /// Rank of a sorted multiset among all multisets of its size.
  std::uint64_t rank(const std::vector<std::uint32_t>& sorted) const;
  std::vector<std::uint32_t> unrank(std::uint64_t r, int n) const;

  double norm_squared() const;

 private:
  std::uint64_t binom(std::uint64_t n, std::uint64_t k) const;

  std::size_t bins_;
  int n_max_;
  std::vector<std::vector<std::uint64_t>> binom_;
  std::vector<Sector> sectors_;
};

/// Discretized input field tensored with the atom state.
SectorState build_input_state(const TimeBinConfig& cfg);

/// Applies the bin-k unitary in place. Throws UnsupportedConfiguration unless
/// d = 2, S = I, L = c sigma_- with real c >= 0 and H diagonal.
void step_collision(SectorState& state, std::size_t k, const SLHTriple& slh, double dt_bin);

/// Partial trace over all bins.
Operator reduced_system_state(const SectorState& state);

struct OracleSample {
  std::size_t bins_done;
  double time;
  Operator rho;
  double p_e;
  double flux_integrated;  // photons emitted into bins already passed
  double quad_integrated;  // sum over passed bins of sqrt(dt) <e^{i phi} b_j + h.c.>
};

struct OracleResult {
  std::vector<OracleSample> samples;
  double max_norm_defect = 0.0;
};

/// Runs all bins, sampling after every bins/samples of them.
OracleResult run_timebin_oracle(const SLHTriple& slh, const TimeBinConfig& cfg);

/// Single photon split over two waveguide directions.
struct TwoModeOracleInput {
  cplx amp_forward;
  WavePacket xi;
  cplx amp_backward;
  WavePacket eta;
};

struct TwoModeOracleSample {
  double time;
  Operator rho;
  double p_e;
  double flux_forward;
  double flux_backward;
};

/// One-photon oracle for the two-mode waveguide: L_i = c_i sigma_-, S_ij = delta_ij I.
/// Limited to bins <= 1000.
std::vector<TwoModeOracleSample> run_twomode_oracle(const MultiModeSLH& slh, std::size_t bins,
                                                    double t_start, double dt_bin,
                                                    const TwoModeOracleInput& input,
                                                    std::size_t samples = 10);

/// 1/2 sum |eigenvalues(a - b)|.
double trace_distance(const Operator& a, const Operator& b);

}  // namespace fockme
