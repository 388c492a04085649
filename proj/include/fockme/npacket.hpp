#pragma once

#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fockme/hierarchy_core.hpp"
#include "fockme/wavepackets.hpp"

namespace fockme {

/// Index multiset i_1 <= ... <= i_N into the packet basis.
using IndexTuple = std::vector<int>;

/// General N-photon state sum_i lambda_i |occupation(i)> over an orthonormal packet basis.
struct NPhotonSpec {
  BasisSet basis;
  std::map<IndexTuple, cplx> amplitudes;  // keys sorted ascending

  int photons() const;
  std::size_t basis_size() const { return basis.packets.size(); }
  /// Throws InvalidInput on unsorted or out-of-range indices, mixed photon numbers,
  /// or sum |lambda|^2 != 1 (to 1e-10).
  void validate() const;
  /// Photons per basis packet for an index multiset.
  std::vector<int> occupation(const IndexTuple& indices) const;
};

/// lambda(n) = sqrt(n_1! n_2! ...) * sum of raw[t] over all tuples t that are
/// orderings of the same multiset. With `renormalize`, the result is scaled to unit norm.
NPhotonSpec symmetrize(const std::vector<std::pair<IndexTuple, cplx>>& raw, const BasisSet& basis,
                       bool renormalize = false);

/// Occupation labels of all amplitudes with |lambda|^2 >= 1e-14, closed under photon removal.
std::vector<OccupationLabel> reachable_occupations(const NPhotonSpec& spec);

/// Canonical (ket >= bra) label pairs the hierarchy evolves.
std::vector<std::pair<OccupationLabel, OccupationLabel>> reachable_labels(const NPhotonSpec& spec);

ChannelHierarchy make_npacket_hierarchy(const SLHTriple& slh, const NPhotonSpec& spec,
                                        std::vector<OutputSpec> outputs = {},
                                        Storage storage = Storage::Canonical,
                                        ApplyRoute route = ApplyRoute::Auto);

/// Weights w_{a,b} = lambda_a conj(lambda_b) that assemble the physical system state.
std::vector<PairWeight> npacket_weights(const ChannelHierarchy& h, const NPhotonSpec& spec);

using LabelPairMap = std::map<std::pair<OccupationLabel, OccupationLabel>, Operator>;

/// Derivatives of every canonical level; `states` must hold all reachable canonical pairs.
LabelPairMap npacket_hierarchy_rhs(const SLHTriple& slh, const NPhotonSpec& spec,
                                   const LabelPairMap& states, double t);

/// {"basis": [packet, ...], "amplitudes": [{"indices": [...], "re", "im"}], "symmetrize": false}
NPhotonSpec npacket_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

}  // namespace fockme
