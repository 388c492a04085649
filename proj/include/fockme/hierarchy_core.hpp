#pragma once

// Shared engine behind the single-mode, two-mode and N-packet hierarchies.
//
// A field is described by channels: each channel is one temporal packet
// feeding one spatial mode of the (S, L, H) system. Field reference states are
// occupation labels (photon count per channel). Generalized density operators
// rho_{a,b} are indexed by a ket label a and a bra label b; only the canonical
// half a >= b is stored unless Storage::Full is requested.
//
// Flat state layout (complex values, interleaved re/im when viewed as double):
//   [ level 0 matrix (d*d, row-major) | level 1 | ... | output 0 levels | output 1 levels | ... ]

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "fockme/operators.hpp"
#include "fockme/wavepackets.hpp"

namespace fockme {

struct Channel {
  std::size_t mode;
  WavePacket packet;
};

using OccupationLabel = std::vector<int>;

enum class Storage { Canonical, Full };

/// How superoperator terms are applied: as precomputed d^2 x d^2 matrices
/// (batched SIMD mat-vec) or as products of d x d matrices.
enum class ApplyRoute { Auto, Superoperator, Sandwich };

struct OutputSpec {
  enum class Kind { Flux, Quadrature };
  Kind kind = Kind::Flux;
  std::size_t mode = 0;   // flux: left mode j of b_j^dag b_k; quadrature: mode
  std::size_t mode2 = 0;  // flux: right mode k
  double phi = 0.0;

  static OutputSpec flux(std::size_t mode) { return {Kind::Flux, mode, mode, 0.0}; }
  static OutputSpec cross_flux(std::size_t j, std::size_t k) { return {Kind::Flux, j, k, 0.0}; }
  static OutputSpec quadrature(std::size_t mode, double phi) {
    return {Kind::Quadrature, mode, mode, phi};
  }
  bool operator==(const OutputSpec&) const = default;
};

struct LevelRef {
  std::size_t index;
  bool adjoint;
};

/// Weight w on rho_{a,b} (a, b label indices).
struct PairWeight {
  std::size_t a;
  std::size_t b;
  cplx w;
};

class ChannelHierarchy {
 public:
  /// `labels` must be closed under removing one photon from any channel; they
  /// are sorted lexicographically on construction.
  ChannelHierarchy(MultiModeSLH slh, std::vector<Channel> channels,
                   std::vector<OccupationLabel> labels, std::vector<OutputSpec> outputs = {},
                   Storage storage = Storage::Canonical, ApplyRoute route = ApplyRoute::Auto);

  std::size_t dim() const noexcept { return d_; }
  const MultiModeSLH& slh() const noexcept { return slh_; }
  const std::vector<Channel>& channels() const noexcept { return channels_; }
  const std::vector<OccupationLabel>& labels() const noexcept { return labels_; }
  const std::vector<OutputSpec>& outputs() const noexcept { return outputs_; }
  Storage storage() const noexcept { return storage_; }
  ApplyRoute route() const noexcept { return route_; }

  std::size_t num_labels() const noexcept { return labels_.size(); }
  std::size_t num_levels() const noexcept { return pairs_.size(); }
  /// Throws InvalidInput for an unknown label.
  std::size_t label_index(const OccupationLabel& label) const;
  LevelRef level(std::size_t a, std::size_t b) const noexcept;
  /// (ket, bra) label indices of a stored level.
  std::pair<std::size_t, std::size_t> level_pair(std::size_t k) const { return pairs_[k]; }

  /// Length of the flat state in doubles.
  std::size_t state_size() const noexcept { return 2 * (matrix_block() + output_block()); }
  std::size_t matrix_block() const noexcept { return pairs_.size() * d_ * d_; }
  std::size_t output_block() const noexcept { return outputs_.size() * pairs_.size(); }

  /// rho_{a,a} = rho_sys, every other level and every accumulator zero.
  std::vector<double> initial_state(const Operator& rho_sys) const;

  /// Time derivative of the flat state. Not thread-safe: one instance per thread.
  void rhs(double t, const double* y, double* dy) const;

  Operator matrix(const double* y, std::size_t a, std::size_t b) const;
  /// Accumulator value E_{a,b} of output `obs`.
  cplx output(const double* y, std::size_t obs, std::size_t a, std::size_t b) const;

  /// sum w * rho_{a,b}
  Operator combine(const double* y, const std::vector<PairWeight>& weights) const;
  /// sum conj(w) * E_{a,b}: the expectation that matches combine() with the same weights.
  cplx combine_output(const double* y, std::size_t obs, const std::vector<PairWeight>& weights) const;
  /// Same combination applied to the instantaneous rates dE_{a,b}/dt at time t.
  cplx combine_output_rate(double t, const double* y, std::size_t obs,
                           const std::vector<PairWeight>& weights) const;

 private:
  struct Sandwich {
    Matrix left;
    Matrix right;
    bool left_identity;
    bool right_identity;
    cplx scalar;
  };
  struct Superop {
    std::vector<Sandwich> parts;
    std::vector<cplx> colmajor;  // (d^2 x d^2), acts on row-major vec(X)
  };
  // k * (conj_ch >= 0 ? conj(f[conj_ch]) : 1) * (plain_ch >= 0 ? f[plain_ch] : 1)
  struct Coef {
    cplx k;
    std::int32_t conj_ch;
    std::int32_t plain_ch;
  };
  struct Term {
    std::uint32_t dst;
    std::uint32_t src;
    bool src_adjoint;
    Coef coef;
  };
  struct OutTerm {
    std::uint32_t dst;
    std::uint32_t src;
    bool src_adjoint;
    std::uint32_t op;
    Coef coef;
  };

  void build_superops();
  void build_terms();
  void build_output_terms();
  std::size_t superop_a(std::size_t mode) const { return 1 + mode; }
  std::size_t superop_b(std::size_t mode) const { return 1 + modes_ + mode; }
  std::size_t superop_c(std::size_t s, std::size_t s2) const { return 1 + 2 * modes_ + s * modes_ + s2; }
  std::uint32_t add_output_op(const Matrix& x);
  std::size_t lowered(std::size_t label, std::size_t channel) const { return lower_[label][channel]; }
  static cplx eval_coef(const Coef& c, const std::vector<cplx>& f);
  void apply_group(std::size_t superop, const std::vector<Term>& terms, const cplx* y,
                   const cplx* adj, cplx* dy) const;
  std::size_t find_output(OutputSpec spec) const;
  void evaluate_channels(double t) const;
  void fill_adjoints(const cplx* y) const;
  void accumulate_outputs(const cplx* y, cplx* dy_out) const;
  cplx stored_output(const cplx* acc, std::size_t obs, std::size_t a, std::size_t b) const;

  MultiModeSLH slh_;
  std::vector<Channel> channels_;
  std::vector<OccupationLabel> labels_;
  std::vector<OutputSpec> outputs_;
  Storage storage_;
  ApplyRoute route_;
  std::size_t d_;
  std::size_t modes_;

  std::vector<std::vector<std::size_t>> lower_;  // label index with one photon removed, or npos
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<Superop> superops_;
  std::vector<std::vector<Term>> terms_;  // per superop
  std::vector<Matrix> output_ops_;
  std::vector<std::vector<OutTerm>> out_terms_;  // per output
  bool needs_adjoint_ = false;

  mutable std::vector<cplx> f_;
  mutable std::vector<cplx> adj_;
  mutable std::vector<const cplx*> batch_src_;
  mutable std::vector<cplx*> batch_dst_;
  mutable std::vector<cplx> batch_coef_;
};

/// All labels reachable from `support` by repeatedly removing one photon, sorted.
std::vector<OccupationLabel> down_closure(const std::vector<OccupationLabel>& support);

}  // namespace fockme
