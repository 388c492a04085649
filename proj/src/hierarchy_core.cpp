#include "fockme/hierarchy_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "fockme/errors.hpp"
#include "fockme/simd/kernels.hpp"

namespace fockme {

namespace {

constexpr std::size_t kNoLabel = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kMaxSuperopDim = 8;

bool is_zero(const Matrix& m) { return m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

std::vector<OccupationLabel> down_closure(const std::vector<OccupationLabel>& support) {
  std::set<OccupationLabel> seen;
  std::vector<OccupationLabel> stack(support.begin(), support.end());
  while (!stack.empty()) {
    OccupationLabel l = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(l).second) continue;
    for (std::size_t c = 0; c < l.size(); ++c) {
      if (l[c] > 0) {
        OccupationLabel lower = l;
        --lower[c];
        if (!seen.count(lower)) stack.push_back(std::move(lower));
      }
    }
  }
  return {seen.begin(), seen.end()};
}

ChannelHierarchy::ChannelHierarchy(MultiModeSLH slh, std::vector<Channel> channels,
                                   std::vector<OccupationLabel> labels,
                                   std::vector<OutputSpec> outputs, Storage storage,
                                   ApplyRoute route)
    : slh_(std::move(slh)),
      channels_(std::move(channels)),
      labels_(std::move(labels)),
      outputs_(std::move(outputs)),
      storage_(storage),
      route_(route) {
  slh_.validate();
  d_ = slh_.dim();
  modes_ = slh_.modes();
  for (const auto& ch : channels_) {
    if (ch.mode >= modes_) throw InvalidInput("channel refers to mode " + std::to_string(ch.mode));
  }
  if (labels_.empty()) throw InvalidInput("hierarchy needs at least one label");
  for (const auto& l : labels_) {
    if (l.size() != channels_.size()) throw InvalidInput("label length differs from channel count");
    if (std::any_of(l.begin(), l.end(), [](int n) { return n < 0; })) {
      throw InvalidInput("negative occupation in label");
    }
  }
  std::sort(labels_.begin(), labels_.end());
  if (std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end()) {
    throw InvalidInput("duplicate occupation label");
  }

  lower_.assign(labels_.size(), std::vector<std::size_t>(channels_.size(), kNoLabel));
  for (std::size_t a = 0; a < labels_.size(); ++a) {
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      if (labels_[a][c] == 0) continue;
      OccupationLabel l = labels_[a];
      --l[c];
      const auto it = std::lower_bound(labels_.begin(), labels_.end(), l);
      if (it == labels_.end() || *it != l) {
        throw InvalidInput("label set is not closed under photon removal");
      }
      lower_[a][c] = static_cast<std::size_t>(it - labels_.begin());
    }
  }

  for (const auto& o : outputs_) {
    if (o.mode >= modes_ || o.mode2 >= modes_) throw InvalidInput("output refers to unknown mode");
    if (o.kind == OutputSpec::Kind::Quadrature && o.mode != o.mode2) {
      throw InvalidInput("quadrature output takes a single mode");
    }
  }
  // E_{b,a} of b_j^dag b_k is conj(E_{a,b}) of b_k^dag b_j, so cross fluxes travel in pairs.
  if (storage_ == Storage::Canonical) {
    const std::vector<OutputSpec> requested = outputs_;
    for (const auto& o : requested) {
      if (o.kind == OutputSpec::Kind::Flux && o.mode != o.mode2) {
        const auto partner = OutputSpec::cross_flux(o.mode2, o.mode);
        if (std::find(outputs_.begin(), outputs_.end(), partner) == outputs_.end()) {
          outputs_.push_back(partner);
        }
      }
    }
  }

  if (route_ == ApplyRoute::Auto) {
    route_ = d_ <= kMaxSuperopDim ? ApplyRoute::Superoperator : ApplyRoute::Sandwich;
  }

  const std::size_t n = labels_.size();
  if (storage_ == Storage::Canonical) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b <= a; ++b) pairs_.emplace_back(a, b);
    }
  } else {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) pairs_.emplace_back(a, b);
    }
  }

  build_superops();
  build_terms();
  build_output_terms();
  f_.resize(channels_.size());
  adj_.resize(needs_adjoint_ ? matrix_block() : 0);
}

std::size_t ChannelHierarchy::label_index(const OccupationLabel& label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) throw InvalidInput("unknown occupation label");
  return static_cast<std::size_t>(it - labels_.begin());
}

LevelRef ChannelHierarchy::level(std::size_t a, std::size_t b) const noexcept {
  if (storage_ == Storage::Full) return {a * labels_.size() + b, false};
  if (a >= b) return {a * (a + 1) / 2 + b, false};
  return {b * (b + 1) / 2 + a, true};
}

void ChannelHierarchy::build_superops() {
  const Matrix id = Matrix::Identity(d_, d_);
  const Matrix zero = Matrix::Zero(d_, d_);
  superops_.assign(1 + 2 * modes_ + modes_ * modes_, {});

  auto add = [&](Superop& op, const Matrix& left, const Matrix& right, bool lid, bool rid,
                 cplx scalar) {
    if ((!lid && is_zero(left)) || (!rid && is_zero(right))) return;
    op.parts.push_back({lid ? zero : left, rid ? zero : right, lid, rid, scalar});
  };

  Matrix ldl = Matrix::Zero(d_, d_);
  for (const auto& l : slh_.l) ldl += l.matrix().adjoint() * l.matrix();
  const Matrix heff = cplx(0.0, -1.0) * slh_.h.matrix() - 0.5 * ldl;
  add(superops_[0], heff, id, false, true, 1.0);
  add(superops_[0], id, heff.adjoint(), true, false, 1.0);
  for (const auto& l : slh_.l) add(superops_[0], l.matrix(), l.matrix().adjoint(), false, false, 1.0);

  for (std::size_t s = 0; s < modes_; ++s) {
    Matrix a_left = Matrix::Zero(d_, d_);
    Matrix b_right = Matrix::Zero(d_, d_);
    for (std::size_t i = 0; i < modes_; ++i) {
      const Matrix& sis = slh_.s[i][s].matrix();
      const Matrix& li = slh_.l[i].matrix();
      add(superops_[superop_a(s)], sis, li.adjoint(), false, false, 1.0);
      add(superops_[superop_b(s)], li, sis.adjoint(), false, false, 1.0);
      a_left -= li.adjoint() * sis;
      b_right -= sis.adjoint() * li;
    }
    add(superops_[superop_a(s)], a_left, id, false, true, 1.0);
    add(superops_[superop_b(s)], id, b_right, true, false, 1.0);
    for (std::size_t s2 = 0; s2 < modes_; ++s2) {
      Superop& c = superops_[superop_c(s, s2)];
      for (std::size_t i = 0; i < modes_; ++i) {
        add(c, slh_.s[i][s].matrix(), slh_.s[i][s2].matrix().adjoint(), false, false, 1.0);
      }
      if (s == s2) add(c, id, id, true, true, -1.0);
    }
  }

  if (route_ != ApplyRoute::Superoperator) return;
  const std::size_t n = d_ * d_;
  for (auto& op : superops_) {
    if (op.parts.empty()) continue;
    op.colmajor.assign(n * n, cplx{});
    for (const auto& p : op.parts) {
      for (std::size_t i = 0; i < d_; ++i) {
        for (std::size_t j = 0; j < d_; ++j) {
          for (std::size_t k = 0; k < d_; ++k) {
            const cplx lik = p.left_identity ? cplx(i == k ? 1.0 : 0.0) : p.left(i, k);
            if (lik == cplx{}) continue;
            for (std::size_t l = 0; l < d_; ++l) {
              const cplx rlj = p.right_identity ? cplx(l == j ? 1.0 : 0.0) : p.right(l, j);
              if (rlj == cplx{}) continue;
              op.colmajor[(k * d_ + l) * n + (i * d_ + j)] += p.scalar * lik * rlj;
            }
          }
        }
      }
    }
  }
}

void ChannelHierarchy::build_terms() {
  terms_.assign(superops_.size(), {});
  auto push = [&](std::size_t op, std::size_t dst, std::size_t a, std::size_t b, Coef coef) {
    if (superops_[op].parts.empty()) return;
    const LevelRef src = level(a, b);
    terms_[op].push_back({static_cast<std::uint32_t>(dst), static_cast<std::uint32_t>(src.index),
                          src.adjoint, coef});
    needs_adjoint_ = needs_adjoint_ || src.adjoint;
  };
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto [a, b] = pairs_[k];
    push(0, k, a, b, {1.0, -1, -1});
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      const auto mode = channels_[c].mode;
      const int ac = labels_[a][c];
      const int bc = labels_[b][c];
      const auto ci = static_cast<std::int32_t>(c);
      if (ac > 0) push(superop_a(mode), k, lowered(a, c), b, {std::sqrt(double(ac)), -1, ci});
      if (bc > 0) push(superop_b(mode), k, a, lowered(b, c), {std::sqrt(double(bc)), ci, -1});
      if (ac == 0) continue;
      for (std::size_t c2 = 0; c2 < channels_.size(); ++c2) {
        const int bc2 = labels_[b][c2];
        if (bc2 == 0) continue;
        push(superop_c(mode, channels_[c2].mode), k, lowered(a, c), lowered(b, c2),
             {std::sqrt(double(ac) * double(bc2)), static_cast<std::int32_t>(c2), ci});
      }
    }
  }
}

std::uint32_t ChannelHierarchy::add_output_op(const Matrix& x) {
  for (std::size_t i = 0; i < output_ops_.size(); ++i) {
    if (output_ops_[i] == x) return static_cast<std::uint32_t>(i);
  }
  output_ops_.push_back(x);
  return static_cast<std::uint32_t>(output_ops_.size() - 1);
}

void ChannelHierarchy::build_output_terms() {
  out_terms_.assign(outputs_.size(), {});
  for (std::size_t o = 0; o < outputs_.size(); ++o) {
    const OutputSpec& spec = outputs_[o];
    const std::size_t j = spec.mode;
    const std::size_t k2 = spec.mode2;
    const Matrix& lj = slh_.l[j].matrix();
    const Matrix& lk = slh_.l[k2].matrix();
    auto push = [&](std::size_t dst, std::size_t a, std::size_t b, const Matrix& x, Coef coef) {
      if (is_zero(x)) return;
      const LevelRef src = level(a, b);
      out_terms_[o].push_back({static_cast<std::uint32_t>(dst),
                               static_cast<std::uint32_t>(src.index), src.adjoint,
                               add_output_op(x), coef});
      needs_adjoint_ = needs_adjoint_ || src.adjoint;
    };
    const bool flux = spec.kind == OutputSpec::Kind::Flux;
    const cplx up = std::polar(1.0, spec.phi);
    for (std::size_t lv = 0; lv < pairs_.size(); ++lv) {
      const auto [a, b] = pairs_[lv];
      if (flux) {
        push(lv, a, b, lj.adjoint() * lk, {1.0, -1, -1});
      } else {
        push(lv, a, b, up * lj + std::conj(up) * lj.adjoint(), {1.0, -1, -1});
      }
      for (std::size_t c = 0; c < channels_.size(); ++c) {
        const auto s = channels_[c].mode;
        const auto ci = static_cast<std::int32_t>(c);
        const int ac = labels_[a][c];
        const int bc = labels_[b][c];
        if (flux) {
          const Matrix& skc = slh_.s[k2][s].matrix();
          const Matrix& sjc = slh_.s[j][s].matrix();
          if (bc > 0) push(lv, a, lowered(b, c), lj.adjoint() * skc, {std::sqrt(double(bc)), -1, ci});
          if (ac > 0) push(lv, lowered(a, c), b, sjc.adjoint() * lk, {std::sqrt(double(ac)), ci, -1});
          if (ac == 0) continue;
          for (std::size_t c2 = 0; c2 < channels_.size(); ++c2) {
            const int bc2 = labels_[b][c2];
            if (bc2 == 0) continue;
            const Matrix& skc2 = slh_.s[k2][channels_[c2].mode].matrix();
            push(lv, lowered(a, c), lowered(b, c2), sjc.adjoint() * skc2,
                 {std::sqrt(double(ac) * double(bc2)), ci, static_cast<std::int32_t>(c2)});
          }
        } else {
          const Matrix& sjc = slh_.s[j][s].matrix();
          if (bc > 0) push(lv, a, lowered(b, c), sjc, {up * std::sqrt(double(bc)), -1, ci});
          if (ac > 0) {
            push(lv, lowered(a, c), b, sjc.adjoint(), {std::conj(up) * std::sqrt(double(ac)), ci, -1});
          }
        }
      }
    }
  }
}

cplx ChannelHierarchy::eval_coef(const Coef& c, const std::vector<cplx>& f) {
  cplx v = c.k;
  if (c.conj_ch >= 0) v *= std::conj(f[static_cast<std::size_t>(c.conj_ch)]);
  if (c.plain_ch >= 0) v *= f[static_cast<std::size_t>(c.plain_ch)];
  return v;
}

std::vector<double> ChannelHierarchy::initial_state(const Operator& rho_sys) const {
  if (rho_sys.dim() != d_) throw InvalidInput("initial state: dimension mismatch");
  require_density_matrix(rho_sys);
  std::vector<double> y(state_size(), 0.0);
  auto* yc = reinterpret_cast<cplx*>(y.data());
  for (std::size_t a = 0; a < labels_.size(); ++a) {
    std::copy(rho_sys.data(), rho_sys.data() + d_ * d_, yc + level(a, a).index * d_ * d_);
  }
  return y;
}

void ChannelHierarchy::evaluate_channels(double t) const {
  for (std::size_t c = 0; c < channels_.size(); ++c) f_[c] = channels_[c].packet.eval(t);
}

void ChannelHierarchy::fill_adjoints(const cplx* y) const {
  if (!needs_adjoint_) return;
  const std::size_t dd = d_ * d_;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const cplx* src = y + k * dd;
    cplx* dst = adj_.data() + k * dd;
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) dst[i * d_ + j] = std::conj(src[j * d_ + i]);
    }
  }
}

void ChannelHierarchy::apply_group(std::size_t op, const std::vector<Term>& terms, const cplx* y,
                                   const cplx* adj, cplx* dy) const {
  const std::size_t dd = d_ * d_;
  batch_src_.clear();
  batch_dst_.clear();
  batch_coef_.clear();
  for (const Term& term : terms) {
    const cplx coef = eval_coef(term.coef, f_);
    if (coef == cplx{}) continue;
    batch_src_.push_back((term.src_adjoint ? adj : y) + term.src * dd);
    batch_dst_.push_back(dy + term.dst * dd);
    batch_coef_.push_back(coef);
  }
  if (batch_src_.empty()) return;

  const Superop& sop = superops_[op];
  if (route_ == ApplyRoute::Superoperator) {
    simd::active().cmatvec_batch(sop.colmajor.data(), dd, batch_src_.data(), batch_coef_.data(),
                                 batch_dst_.data(), batch_src_.size());
    return;
  }
  using Map = Eigen::Map<Matrix>;
  using CMap = Eigen::Map<const Matrix>;
  const auto di = static_cast<Eigen::Index>(d_);
  Matrix acc(di, di);
  for (std::size_t i = 0; i < batch_src_.size(); ++i) {
    const CMap x(batch_src_[i], di, di);
    acc.setZero();
    for (const auto& p : sop.parts) {
      if (p.left_identity && p.right_identity) {
        acc += p.scalar * x;
      } else if (p.left_identity) {
        acc.noalias() += p.scalar * (x * p.right);
      } else if (p.right_identity) {
        acc.noalias() += p.scalar * (p.left * x);
      } else {
        acc.noalias() += p.scalar * (p.left * x * p.right);
      }
    }
    Map(batch_dst_[i], di, di) += batch_coef_[i] * acc;
  }
}

void ChannelHierarchy::accumulate_outputs(const cplx* y, cplx* dy_out) const {
  const std::size_t dd = d_ * d_;
  const auto& dot = simd::active().conj_dot;
  const std::size_t nlev = pairs_.size();
  for (std::size_t o = 0; o < outputs_.size(); ++o) {
    cplx* rate = dy_out + o * nlev;
    for (const OutTerm& term : out_terms_[o]) {
      const cplx coef = eval_coef(term.coef, f_);
      if (coef == cplx{}) continue;
      const cplx* src = (term.src_adjoint ? adj_.data() : y) + term.src * dd;
      rate[term.dst] += coef * dot(src, output_ops_[term.op].data(), dd);
    }
  }
}

void ChannelHierarchy::rhs(double t, const double* y, double* dy) const {
  const auto* yc = reinterpret_cast<const cplx*>(y);
  auto* dyc = reinterpret_cast<cplx*>(dy);
  evaluate_channels(t);
  fill_adjoints(yc);
  std::fill(dy, dy + state_size(), 0.0);
  for (std::size_t op = 0; op < superops_.size(); ++op) {
    if (!terms_[op].empty()) apply_group(op, terms_[op], yc, adj_.data(), dyc);
  }
  accumulate_outputs(yc, dyc + matrix_block());
}

Operator ChannelHierarchy::matrix(const double* y, std::size_t a, std::size_t b) const {
  if (a >= labels_.size() || b >= labels_.size()) throw InvalidInput("level out of range");
  const LevelRef ref = level(a, b);
  const auto* yc = reinterpret_cast<const cplx*>(y) + ref.index * d_ * d_;
  Matrix m = Eigen::Map<const Matrix>(yc, static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(d_));
  if (ref.adjoint) m = m.adjoint().eval();
  return Operator(std::move(m));
}

std::size_t ChannelHierarchy::find_output(OutputSpec spec) const {
  const auto it = std::find(outputs_.begin(), outputs_.end(), spec);
  if (it == outputs_.end()) throw InvalidInput("output is not tracked by this hierarchy");
  return static_cast<std::size_t>(it - outputs_.begin());
}

cplx ChannelHierarchy::stored_output(const cplx* acc, std::size_t obs, std::size_t a,
                                     std::size_t b) const {
  const LevelRef ref = level(a, b);
  if (!ref.adjoint) return acc[obs * pairs_.size() + ref.index];
  OutputSpec partner = outputs_[obs];
  std::swap(partner.mode, partner.mode2);
  return std::conj(acc[find_output(partner) * pairs_.size() + ref.index]);
}

cplx ChannelHierarchy::output(const double* y, std::size_t obs, std::size_t a, std::size_t b) const {
  if (obs >= outputs_.size()) throw InvalidInput("output index out of range");
  const auto* acc = reinterpret_cast<const cplx*>(y) + matrix_block();
  return stored_output(acc, obs, a, b);
}

Operator ChannelHierarchy::combine(const double* y, const std::vector<PairWeight>& weights) const {
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(d_));
  for (const auto& w : weights) {
    if (w.w == cplx{}) continue;
    sum += w.w * matrix(y, w.a, w.b).matrix();
  }
  return Operator(std::move(sum));
}

cplx ChannelHierarchy::combine_output(const double* y, std::size_t obs,
                                      const std::vector<PairWeight>& weights) const {
  cplx sum{};
  for (const auto& w : weights) {
    if (w.w != cplx{}) sum += std::conj(w.w) * output(y, obs, w.a, w.b);
  }
  return sum;
}

cplx ChannelHierarchy::combine_output_rate(double t, const double* y, std::size_t obs,
                                           const std::vector<PairWeight>& weights) const {
  if (obs >= outputs_.size()) throw InvalidInput("output index out of range");
  const auto* yc = reinterpret_cast<const cplx*>(y);
  evaluate_channels(t);
  fill_adjoints(yc);
  std::vector<cplx> rates(output_block(), cplx{});
  accumulate_outputs(yc, rates.data());
  cplx sum{};
  for (const auto& w : weights) {
    if (w.w != cplx{}) sum += std::conj(w.w) * stored_output(rates.data(), obs, w.a, w.b);
  }
  return sum;
}

}  // namespace fockme
