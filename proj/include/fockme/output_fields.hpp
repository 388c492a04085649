#pragma once

#include <map>
#include <utility>

#include "fockme/fock_hierarchy.hpp"

namespace fockme {

using LevelMap = std::map<std::pair<int, int>, cplx>;

/// Integrated output-field expectations E_{m,n}[Lambda^out] and E_{m,n}[Z^out]
/// on the canonical levels m >= n.
struct OutputAccumulator {
  LevelMap flux;
  LevelMap quad;
  double phi = 0.0;

  static OutputAccumulator zero(int n_max, double phi);
};

/// dE_{m,n}[Lambda^out]/dt on every canonical level.
LevelMap flux_rhs(const SLHTriple& slh, const WavePacket& xi, const FockHierarchyState& state,
                  double t);

/// dE_{m,n}[Z^out]/dt on every canonical level, homodyne phase phi.
LevelMap quadrature_rhs(const SLHTriple& slh, const WavePacket& xi,
                        const FockHierarchyState& state, double t, double phi);

struct CombinedOutputs {
  double flux;
  double quad;
};

/// sum c_{m,n} E_{m,n}[.] (coefficients not conjugated). Throws InvalidInput when the
/// combination references a missing level or the result has |Im| > 1e-8.
CombinedOutputs combine_outputs(const OutputAccumulator& acc, const FieldCombination& combo);

/// Reads the accumulators of a single-mode engine built with outputs
/// {flux(0), quadrature(0, phi)} (in that order).
OutputAccumulator unpack_outputs(const ChannelHierarchy& h, const double* y, double phi);

}  // namespace fockme
