#include "fockme/output_fields.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fockme/errors.hpp"

namespace fockme {

namespace {

LevelMap output_rates(const SLHTriple& slh, const WavePacket& xi, const FockHierarchyState& state,
                      double t, OutputSpec spec) {
  const ChannelHierarchy h = make_fock_hierarchy(slh, xi, state.n_max, {spec});
  const std::vector<double> y = pack_fock_state(h, state);
  std::vector<double> dy(y.size());
  h.rhs(t, y.data(), dy.data());
  LevelMap rates;
  const auto* acc = reinterpret_cast<const cplx*>(dy.data()) + h.matrix_block();
  for (std::size_t k = 0; k < h.num_levels(); ++k) {
    const auto [m, n] = h.level_pair(k);
    rates[{static_cast<int>(m), static_cast<int>(n)}] = acc[k];
  }
  return rates;
}

cplx lookup(const LevelMap& map, int m, int n) {
  const bool swap = m < n;
  const auto it = map.find(swap ? std::pair{n, m} : std::pair{m, n});
  if (it == map.end()) {
    throw InvalidInput("combination references level (" + std::to_string(m) + "," +
                       std::to_string(n) + ") with no accumulator");
  }
  // Both observables are Hermitian, so E_{n,m} = conj(E_{m,n}).
  return swap ? std::conj(it->second) : it->second;
}

}  // namespace

OutputAccumulator OutputAccumulator::zero(int n_max, double phi) {
  OutputAccumulator acc;
  acc.phi = phi;
  for (int m = 0; m <= n_max; ++m) {
    for (int n = 0; n <= m; ++n) {
      acc.flux[{m, n}] = 0.0;
      acc.quad[{m, n}] = 0.0;
    }
  }
  return acc;
}

LevelMap flux_rhs(const SLHTriple& slh, const WavePacket& xi, const FockHierarchyState& state,
                  double t) {
  return output_rates(slh, xi, state, t, OutputSpec::flux(0));
}

LevelMap quadrature_rhs(const SLHTriple& slh, const WavePacket& xi,
                        const FockHierarchyState& state, double t, double phi) {
  return output_rates(slh, xi, state, t, OutputSpec::quadrature(0, phi));
}

CombinedOutputs combine_outputs(const OutputAccumulator& acc, const FieldCombination& combo) {
  cplx flux{};
  cplx quad{};
  for (const auto& [mn, c] : combo.coeffs) {
    flux += c * lookup(acc.flux, mn.first, mn.second);
    quad += c * lookup(acc.quad, mn.first, mn.second);
  }
  if (std::abs(flux.imag()) > 1e-8 || std::abs(quad.imag()) > 1e-8) {
    throw InvalidInput("combined output has a non-negligible imaginary part");
  }
  return {flux.real(), quad.real()};
}

OutputAccumulator unpack_outputs(const ChannelHierarchy& h, const double* y, double phi) {
  if (h.outputs().size() < 2 || h.outputs()[0] != OutputSpec::flux(0) ||
      h.outputs()[1] != OutputSpec::quadrature(0, phi)) {
    throw InvalidInput("engine does not track flux and quadrature for this phase");
  }
  OutputAccumulator acc;
  acc.phi = phi;
  for (std::size_t k = 0; k < h.num_levels(); ++k) {
    const auto [m, n] = h.level_pair(k);
    const std::pair key{static_cast<int>(m), static_cast<int>(n)};
    acc.flux[key] = h.output(y, 0, m, n);
    acc.quad[key] = h.output(y, 1, m, n);
  }
  return acc;
}

}  // namespace fockme
