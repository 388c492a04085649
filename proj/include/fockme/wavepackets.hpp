#pragma once

#include <complex>
#include <filesystem>
#include <functional>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace fockme {

using cplx = std::complex<double>;

class WavePacket;

struct GaussianShape {
  double omega;  // bandwidth, rate units
  double t_a;    // arrival time of the peak
};

struct RectangularShape {
  double t0;
  double t_max;  // duration; amplitude is 1/sqrt(t_max) on [t0, t0 + t_max]
};

/// Uniform grid starting at t0 with spacing dt; linear interpolation in between, zero outside.
struct SampledShape {
  double t0;
  double dt;
  std::vector<cplx> values;
};

/// Weighted sum of other packets, used to express rotated orthonormal bases.
struct SuperpositionShape {
  std::vector<std::pair<cplx, std::shared_ptr<const WavePacket>>> terms;
};

/// Temporal envelope xi(t) of a continuous-mode photon wave packet.
///
/// The detuning enters as a phase: eval(t) = shape(t) * exp(-i * detuning * t).
class WavePacket {
 public:
  enum class Kind { Gaussian, Rectangular, Sampled, Superposition };

  static WavePacket gaussian(double omega, double t_a, double detuning = 0.0);
  static WavePacket rectangular(double t0, double t_max, double detuning = 0.0);
  static WavePacket sampled(double t0, double dt, std::vector<cplx> values, double detuning = 0.0);
  static WavePacket superposition(const std::vector<std::pair<cplx, WavePacket>>& terms);

  Kind kind() const noexcept;
  double detuning() const noexcept { return detuning_; }
  /// Amplitude factor applied on top of the shape (1 unless built through scaled()).
  cplx scale() const noexcept { return scale_; }
  const GaussianShape* as_gaussian() const noexcept { return std::get_if<GaussianShape>(&shape_); }
  const RectangularShape* as_rectangular() const noexcept {
    return std::get_if<RectangularShape>(&shape_);
  }
  const SampledShape* as_sampled() const noexcept { return std::get_if<SampledShape>(&shape_); }

  cplx eval(double t) const;
  /// Interval outside of which the packet is treated as zero.
  std::pair<double, double> support() const;
  /// Points where the envelope is not smooth (plus support ends); used for quadrature.
  std::vector<double> breakpoints() const;
  /// Finest time scale of the envelope (1/omega, t_max, grid dt, ...).
  double time_scale() const;
  /// Copy with the amplitude multiplied by `factor`.
  WavePacket scaled(cplx factor) const;

 private:
  using Shape = std::variant<GaussianShape, RectangularShape, SampledShape, SuperpositionShape>;
  WavePacket(Shape shape, double detuning) : shape_(std::move(shape)), detuning_(detuning) {}
  cplx shape_value(double t) const;

  Shape shape_;
  double detuning_ = 0.0;
  cplx scale_{1.0, 0.0};
};

inline cplx eval(const WavePacket& packet, double t) { return packet.eval(t); }

/// Integral of |xi(t)|^2 over the packet's support.
double norm_check(const WavePacket& packet);

struct BasisSet {
  std::vector<WavePacket> packets;
};

/// Overlaps G_ij = integral conj(xi_i(t)) xi_j(t) dt.
Eigen::MatrixXcd gram_matrix(const BasisSet& basis);

/// max |G_ij - delta_ij|.
double orthonormality_defect(const BasisSet& basis);

/// Integral of f over [a, b] by composite Simpson on the given breakpoints,
/// refining every segment to spacing <= h_max.
double simpson(const std::function<double(double)>& f, std::vector<double> breakpoints,
               double h_max);

/// Two- or three-column CSV (time, re[, im]) on a uniform grid.
WavePacket load_sampled_csv(const std::filesystem::path& path, double detuning = 0.0);

/// {"kind": "gaussian", "omega", "t_a", "detuning"} | {"kind": "rectangular", "t0", "t_max"} |
/// {"kind": "sampled", "file"} | {"kind": "sampled", "t0", "dt", "values": [[re, im], ...]}.
/// Paths in "file" are resolved against `base_dir`.
WavePacket packet_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

}  // namespace fockme
