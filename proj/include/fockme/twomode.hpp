#pragma once

#include <array>
#include <map>

#include "fockme/hierarchy_core.hpp"
#include "fockme/operators.hpp"
#include "fockme/wavepackets.hpp"

namespace fockme {

/// (m, n, p, q): mode-1 ket/bra photon numbers m, n and mode-2 ket/bra p, q.
using TwoModeIndex = std::array<int, 4>;

struct TwoModeHierarchyState {
  int n_max = 0;
  int q_max = 0;
  double time = 0.0;
  std::map<TwoModeIndex, Operator> matrices;  // canonical half only

  /// rho_{m,n;p,q} for any index (non-canonical ones through the adjoint).
  Operator level(const TwoModeIndex& idx) const;
};

/// Input field coefficients: rho_field = sum c_{m,n;p,q} |n;q><m;p|.
struct TwoModeCombination {
  std::map<TwoModeIndex, cplx> coeffs;

  static TwoModeCombination fock(int n, int q);
  /// (|1;0> + |0;1>) / sqrt(2)
  static TwoModeCombination noon_one_photon();
  void validate() const;
  std::vector<PairWeight> weights(const ChannelHierarchy& h) const;
};

/// Engine with channel 0 = xi feeding mode 0 and channel 1 = eta feeding mode 1.
/// Labels are (m, p) with m <= N, p <= Q.
ChannelHierarchy make_twomode_hierarchy(const MultiModeSLH& slh, const WavePacket& xi,
                                        const WavePacket& eta, int n_max, int q_max,
                                        std::vector<OutputSpec> outputs = {},
                                        Storage storage = Storage::Canonical,
                                        ApplyRoute route = ApplyRoute::Auto);

/// Canonical level index -> (m, n, p, q).
TwoModeIndex twomode_index(const ChannelHierarchy& h, std::size_t level);

/// Number of independently evolved matrices, and of all (m,n;p,q) combinations.
std::size_t twomode_independent_count(int n_max, int q_max);
std::size_t twomode_full_count(int n_max, int q_max);

TwoModeHierarchyState twomode_initial_state(const Operator& rho_sys, int n_max, int q_max);
TwoModeHierarchyState unpack_twomode_state(const ChannelHierarchy& h, const double* y, double t);
std::vector<double> pack_twomode_state(const ChannelHierarchy& h, const TwoModeHierarchyState& s);

TwoModeHierarchyState twomode_rhs(const MultiModeSLH& slh, const WavePacket& xi,
                                  const WavePacket& eta, const TwoModeHierarchyState& state,
                                  double t);

/// dE[Lambda_jj^out]/dt per canonical level; mode is 1 or 2.
std::map<TwoModeIndex, cplx> twomode_flux_rhs(const MultiModeSLH& slh, const WavePacket& xi,
                                              const WavePacket& eta,
                                              const TwoModeHierarchyState& state, double t,
                                              int mode);
std::map<TwoModeIndex, cplx> twomode_quadrature_rhs(const MultiModeSLH& slh, const WavePacket& xi,
                                                    const WavePacket& eta,
                                                    const TwoModeHierarchyState& state, double t,
                                                    int mode, double phi);

/// sum conj(c_{m,n;p,q}) rho_{m,n;p,q}
Operator assemble_total_twomode(const TwoModeHierarchyState& state,
                                const TwoModeCombination& combo);

/// Waveguide scattering preset: H = 0, L_i = sqrt(1/2) |g><e|, S_ij = delta_ij I.
MultiModeSLH scattering_preset();

/// The same system with the two field modes exchanged.
MultiModeSLH swap_modes(const MultiModeSLH& slh);

}  // namespace fockme
