#include "fockme/fock_hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fockme/errors.hpp"

namespace fockme {

Operator FockHierarchyState::level(int m, int n) const {
  if (m < 0 || n < 0 || m > n_max || n > n_max) {
    throw InvalidInput("level (" + std::to_string(m) + "," + std::to_string(n) +
                       ") outside hierarchy of N=" + std::to_string(n_max));
  }
  if (m >= n) return matrices.at(index(m, n));
  return matrices.at(index(n, m)).adjoint();
}

FieldCombination FieldCombination::fock(int n) {
  if (n < 0) throw InvalidInput("photon number must be >= 0");
  FieldCombination c;
  c.coeffs[{n, n}] = 1.0;
  return c;
}

FieldCombination FieldCombination::superposition(const std::vector<cplx>& amps) {
  FieldCombination c;
  for (std::size_t m = 0; m < amps.size(); ++m) {
    for (std::size_t n = 0; n < amps.size(); ++n) {
      const cplx v = amps[n] * std::conj(amps[m]);
      if (v != cplx{}) c.coeffs[{static_cast<int>(m), static_cast<int>(n)}] = v;
    }
  }
  return c;
}

FieldCombination FieldCombination::mixture(const std::vector<double>& probs) {
  FieldCombination c;
  for (std::size_t n = 0; n < probs.size(); ++n) {
    if (probs[n] != 0.0) c.coeffs[{static_cast<int>(n), static_cast<int>(n)}] = probs[n];
  }
  return c;
}

int FieldCombination::max_photons() const {
  int top = 0;
  for (const auto& [mn, v] : coeffs) {
    if (mn.first < 0 || mn.second < 0) throw InvalidInput("negative photon number in combination");
    top = std::max({top, mn.first, mn.second});
  }
  return top;
}

void FieldCombination::validate() const {
  const int n = max_photons() + 1;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [mn, v] : coeffs) c(mn.first, mn.second) = v;
  if ((c - c.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidInput("field combination: c_{m,n} != conj(c_{n,m})");
  }
  if (std::abs(c.trace() - 1.0) > 1e-12) throw InvalidInput("field combination: trace is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw InvalidInput("field combination: not positive semidefinite");
  }
}

std::vector<PairWeight> FieldCombination::weights() const {
  std::vector<PairWeight> w;
  for (const auto& [mn, v] : coeffs) {
    w.push_back({static_cast<std::size_t>(mn.first), static_cast<std::size_t>(mn.second),
                 std::conj(v)});
  }
  return w;
}

FockHierarchyState initial_state(const Operator& rho_sys, int n_max) {
  if (n_max < 0) throw InvalidInput("photon number must be >= 0");
  require_density_matrix(rho_sys);
  FockHierarchyState s;
  s.n_max = n_max;
  const Operator zero = Operator::zero(rho_sys.dim());
  for (int m = 0; m <= n_max; ++m) {
    for (int n = 0; n <= m; ++n) s.matrices.push_back(m == n ? rho_sys : zero);
  }
  return s;
}

ChannelHierarchy make_fock_hierarchy(const SLHTriple& slh, const WavePacket& xi, int n_max,
                                     std::vector<OutputSpec> outputs, Storage storage,
                                     ApplyRoute route) {
  if (n_max < 0) throw InvalidInput("photon number must be >= 0");
  slh.validate();
  std::vector<OccupationLabel> labels;
  for (int n = 0; n <= n_max; ++n) labels.push_back({n});
  return ChannelHierarchy(MultiModeSLH::from_single(slh), {Channel{0, xi}}, std::move(labels),
                          std::move(outputs), storage, route);
}

FockHierarchyState unpack_fock_state(const ChannelHierarchy& h, const double* y, double t) {
  FockHierarchyState s;
  s.n_max = static_cast<int>(h.num_labels()) - 1;
  s.time = t;
  for (int m = 0; m <= s.n_max; ++m) {
    for (int n = 0; n <= m; ++n) {
      s.matrices.push_back(h.matrix(y, static_cast<std::size_t>(m), static_cast<std::size_t>(n)));
    }
  }
  return s;
}

std::vector<double> pack_fock_state(const ChannelHierarchy& h, const FockHierarchyState& s) {
  if (static_cast<std::size_t>(s.n_max + 1) != h.num_labels() ||
      s.matrices.size() != FockHierarchyState::count(s.n_max)) {
    throw InvalidInput("hierarchy state does not match the engine's photon number");
  }
  const std::size_t d = h.dim();
  std::vector<double> y(h.state_size(), 0.0);
  auto* yc = reinterpret_cast<cplx*>(y.data());
  for (std::size_t k = 0; k < h.num_levels(); ++k) {
    const auto [a, b] = h.level_pair(k);
    const Operator m = s.level(static_cast<int>(a), static_cast<int>(b));
    if (m.dim() != d) throw InvalidInput("hierarchy state: dimension mismatch");
    std::copy(m.data(), m.data() + d * d, yc + k * d * d);
  }
  return y;
}

FockHierarchyState hierarchy_rhs(const SLHTriple& slh, const WavePacket& xi,
                                 const FockHierarchyState& state, double t) {
  const ChannelHierarchy h = make_fock_hierarchy(slh, xi, state.n_max);
  const std::vector<double> y = pack_fock_state(h, state);
  std::vector<double> dy(y.size());
  h.rhs(t, y.data(), dy.data());
  return unpack_fock_state(h, dy.data(), t);
}

Operator assemble_total(const FockHierarchyState& state, const FieldCombination& combo) {
  if (combo.max_photons() > state.n_max) {
    throw InvalidInput("field combination references a level above N=" +
                       std::to_string(state.n_max));
  }
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(state.dim()),
                            static_cast<Eigen::Index>(state.dim()));
  for (const auto& [mn, c] : combo.coeffs) {
    sum += std::conj(c) * state.level(mn.first, mn.second).matrix();
  }
  return Operator(std::move(sum));
}

double excitation_probability_raw(const Operator& total, const Operator& projector) {
  return (total * projector).trace().real();
}

double excitation_probability(const Operator& total, const Operator& projector) {
  return std::clamp(excitation_probability_raw(total, projector), 0.0, 1.0);
}

nlohmann::json snapshot_json(const FockHierarchyState& state) {
  nlohmann::json levels = nlohmann::json::array();
  for (int m = 0; m <= state.n_max; ++m) {
    for (int n = 0; n <= m; ++n) {
      levels.push_back({{"m", m}, {"n", n}, {"matrix", to_json(state.matrices.at(FockHierarchyState::index(m, n)))}});
    }
  }
  return {{"time", state.time}, {"levels", std::move(levels)}};
}

FockHierarchyState snapshot_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("levels") || !j["levels"].is_array()) {
    throw InvalidInput("snapshot JSON needs a \"levels\" array");
  }
  FockHierarchyState s;
  s.time = j.value("time", 0.0);
  int top = 0;
  for (const auto& lv : j["levels"]) top = std::max(top, lv.at("m").get<int>());
  s.n_max = top;
  s.matrices.resize(FockHierarchyState::count(top));
  std::vector<bool> seen(s.matrices.size(), false);
  for (const auto& lv : j["levels"]) {
    const int m = lv.at("m").get<int>();
    const int n = lv.at("n").get<int>();
    if (n < 0 || n > m) throw InvalidInput("snapshot JSON: levels must satisfy 0 <= n <= m");
    const auto k = FockHierarchyState::index(m, n);
    s.matrices[k] = operator_from_json(lv.at("matrix"));
    seen[k] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw InvalidInput("snapshot JSON: missing levels");
  }
  return s;
}

}  // namespace fockme
