#include "fockme/npacket.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fockme/errors.hpp"

namespace fockme {

namespace {

constexpr double kPruneWeight = 1e-14;

double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

}  // namespace

int NPhotonSpec::photons() const {
  return amplitudes.empty() ? 0 : static_cast<int>(amplitudes.begin()->first.size());
}

std::vector<int> NPhotonSpec::occupation(const IndexTuple& indices) const {
  std::vector<int> counts(basis_size(), 0);
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= basis_size()) {
      throw InvalidInput("basis index " + std::to_string(i) + " out of range");
    }
    ++counts[static_cast<std::size_t>(i)];
  }
  return counts;
}

void NPhotonSpec::validate() const {
  if (basis.packets.empty()) throw InvalidInput("N-photon spec: empty basis");
  if (amplitudes.empty()) throw InvalidInput("N-photon spec: no amplitudes");
  double norm = 0.0;
  const std::size_t n = amplitudes.begin()->first.size();
  for (const auto& [idx, lambda] : amplitudes) {
    if (idx.size() != n) throw InvalidInput("N-photon spec: mixed photon numbers");
    if (!std::is_sorted(idx.begin(), idx.end())) {
      throw InvalidInput("N-photon spec: index tuples must be non-decreasing");
    }
    occupation(idx);
    norm += std::norm(lambda);
  }
  if (std::abs(norm - 1.0) > 1e-10) {
    throw InvalidInput("N-photon spec: sum |lambda|^2 = " + std::to_string(norm));
  }
}

NPhotonSpec symmetrize(const std::vector<std::pair<IndexTuple, cplx>>& raw, const BasisSet& basis,
                       bool renormalize) {
  if (raw.empty()) throw InvalidInput("symmetrize: no amplitudes");
  NPhotonSpec spec;
  spec.basis = basis;
  const std::size_t n = raw.front().first.size();
  for (const auto& [tuple, value] : raw) {
    if (tuple.size() != n) throw InvalidInput("symmetrize: inconsistent tuple lengths");
    IndexTuple key = tuple;
    std::sort(key.begin(), key.end());
    spec.amplitudes[key] += value;
  }
  double norm = 0.0;
  for (auto& [key, lambda] : spec.amplitudes) {
    double weight = 1.0;
    for (int c : spec.occupation(key)) weight *= factorial(c);
    lambda *= std::sqrt(weight);
    norm += std::norm(lambda);
  }
  if (renormalize) {
    if (norm == 0.0) throw InvalidInput("symmetrize: zero state cannot be normalized");
    for (auto& [key, lambda] : spec.amplitudes) lambda /= std::sqrt(norm);
  }
  return spec;
}

std::vector<OccupationLabel> reachable_occupations(const NPhotonSpec& spec) {
  std::vector<OccupationLabel> support;
  for (const auto& [idx, lambda] : spec.amplitudes) {
    if (std::norm(lambda) >= kPruneWeight) support.push_back(spec.occupation(idx));
  }
  if (support.empty()) support.push_back(OccupationLabel(spec.basis_size(), 0));
  return down_closure(support);
}

std::vector<std::pair<OccupationLabel, OccupationLabel>> reachable_labels(const NPhotonSpec& spec) {
  const auto labels = reachable_occupations(spec);
  std::vector<std::pair<OccupationLabel, OccupationLabel>> pairs;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = 0; b <= a; ++b) pairs.emplace_back(labels[a], labels[b]);
  }
  return pairs;
}

ChannelHierarchy make_npacket_hierarchy(const SLHTriple& slh, const NPhotonSpec& spec,
                                        std::vector<OutputSpec> outputs, Storage storage,
                                        ApplyRoute route) {
  spec.validate();
  slh.validate();
  std::vector<Channel> channels;
  for (const auto& p : spec.basis.packets) channels.push_back({0, p});
  return ChannelHierarchy(MultiModeSLH::from_single(slh), std::move(channels),
                          reachable_occupations(spec), std::move(outputs), storage, route);
}

std::vector<PairWeight> npacket_weights(const ChannelHierarchy& h, const NPhotonSpec& spec) {
  std::vector<std::pair<std::size_t, cplx>> amps;
  for (const auto& [idx, lambda] : spec.amplitudes) {
    if (std::norm(lambda) >= kPruneWeight) amps.emplace_back(h.label_index(spec.occupation(idx)), lambda);
  }
  std::vector<PairWeight> w;
  for (const auto& [a, la] : amps) {
    for (const auto& [b, lb] : amps) w.push_back({a, b, la * std::conj(lb)});
  }
  return w;
}

LabelPairMap npacket_hierarchy_rhs(const SLHTriple& slh, const NPhotonSpec& spec,
                                   const LabelPairMap& states, double t) {
  const ChannelHierarchy h = make_npacket_hierarchy(slh, spec);
  const std::size_t d = h.dim();
  std::vector<double> y(h.state_size(), 0.0);
  auto* yc = reinterpret_cast<cplx*>(y.data());
  const auto& labels = h.labels();
  for (std::size_t k = 0; k < h.num_levels(); ++k) {
    const auto [a, b] = h.level_pair(k);
    const auto it = states.find({labels[a], labels[b]});
    if (it == states.end()) throw InvalidInput("npacket state is missing a reachable label pair");
    if (it->second.dim() != d) throw InvalidInput("npacket state: dimension mismatch");
    std::copy(it->second.data(), it->second.data() + d * d, yc + k * d * d);
  }
  std::vector<double> dy(y.size());
  h.rhs(t, y.data(), dy.data());
  LabelPairMap out;
  for (std::size_t k = 0; k < h.num_levels(); ++k) {
    const auto [a, b] = h.level_pair(k);
    out.emplace(std::pair{labels[a], labels[b]}, h.matrix(dy.data(), a, b));
  }
  return out;
}

NPhotonSpec npacket_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("basis") || !j["basis"].is_array()) {
    throw InvalidInput("npacket: missing \"basis\" array");
  }
  if (!j.contains("amplitudes") || !j["amplitudes"].is_array()) {
    throw InvalidInput("npacket: missing \"amplitudes\" array");
  }
  BasisSet basis;
  for (const auto& p : j["basis"]) basis.packets.push_back(packet_from_json(p, base_dir));
  std::vector<std::pair<IndexTuple, cplx>> raw;
  for (const auto& a : j["amplitudes"]) {
    if (!a.is_object() || !a.contains("indices") || !a["indices"].is_array()) {
      throw InvalidInput("npacket: each amplitude needs \"indices\"");
    }
    raw.emplace_back(a["indices"].get<IndexTuple>(),
                     cplx(a.value("re", 0.0), a.value("im", 0.0)));
  }
  if (j.value("symmetrize", false)) {
    return symmetrize(raw, basis, j.value("renormalize", false));
  }
  NPhotonSpec spec;
  spec.basis = std::move(basis);
  for (const auto& [idx, v] : raw) {
    if (!spec.amplitudes.emplace(idx, v).second) throw InvalidInput("npacket: duplicate indices");
  }
  spec.validate();
  return spec;
}

}  // namespace fockme
