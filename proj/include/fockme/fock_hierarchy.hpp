#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fockme/hierarchy_core.hpp"
#include "fockme/operators.hpp"
#include "fockme/wavepackets.hpp"

namespace fockme {

/// Generalized density operators rho_{m,n}, 0 <= n <= m <= N, for an N-photon
/// Fock input in a single mode. Levels are stored in (m, n) order, m major.
struct FockHierarchyState {
  int n_max = 0;
  double time = 0.0;
  std::vector<Operator> matrices;

  static std::size_t count(int n_max) {
    return static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_max + 2) / 2;
  }
  static std::size_t index(int m, int n) {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(m + 1) / 2 +
           static_cast<std::size_t>(n);
  }
  std::size_t dim() const { return matrices.empty() ? 0 : matrices.front().dim(); }
  /// rho_{m,n} for any 0 <= m, n <= N (upper triangle through the adjoint).
  Operator level(int m, int n) const;
};

/// Input field coefficients c_{m,n}: rho_field = sum c_{m,n} |n><m|.
struct FieldCombination {
  std::map<std::pair<int, int>, cplx> coeffs;

  static FieldCombination fock(int n);
  /// sum_n amps[n] |n>, i.e. c_{m,n} = amps[n] conj(amps[m]).
  static FieldCombination superposition(const std::vector<cplx>& amps);
  /// sum_n probs[n] |n><n|.
  static FieldCombination mixture(const std::vector<double>& probs);

  int max_photons() const;
  /// Throws InvalidInput unless [c_{m,n}] is Hermitian, PSD (to -1e-10) with unit trace.
  void validate() const;
  /// Weights for ChannelHierarchy::combine on single-channel labels {0..N}.
  std::vector<PairWeight> weights() const;
};

FockHierarchyState initial_state(const Operator& rho_sys, int n_max);

/// Single-channel engine for an N-photon Fock packet. Labels are {0}, ..., {N},
/// so label index equals photon number.
ChannelHierarchy make_fock_hierarchy(const SLHTriple& slh, const WavePacket& xi, int n_max,
                                     std::vector<OutputSpec> outputs = {},
                                     Storage storage = Storage::Canonical,
                                     ApplyRoute route = ApplyRoute::Auto);

/// Flat engine state <-> FockHierarchyState (matrix part only).
FockHierarchyState unpack_fock_state(const ChannelHierarchy& h, const double* y, double t);
std::vector<double> pack_fock_state(const ChannelHierarchy& h, const FockHierarchyState& s);

/// d rho_{m,n} / dt for every stored level.
FockHierarchyState hierarchy_rhs(const SLHTriple& slh, const WavePacket& xi,
                                 const FockHierarchyState& state, double t);

/// sum_{m,n} conj(c_{m,n}) rho_{m,n}
Operator assemble_total(const FockHierarchyState& state, const FieldCombination& combo);

/// Tr[total * projector], clamped to [0, 1].
double excitation_probability(const Operator& total, const Operator& projector);
/// Unclamped value, for diagnostics.
double excitation_probability_raw(const Operator& total, const Operator& projector);

/// {"time": t, "levels": [{"m", "n", "matrix": Operator JSON}]}
nlohmann::json snapshot_json(const FockHierarchyState& state);
FockHierarchyState snapshot_from_json(const nlohmann::json& j);

}  // namespace fockme
