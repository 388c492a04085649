#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace fockme {

using cplx = std::complex<double>;
using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense complex operator on a d-dimensional system Hilbert space.
///
/// Entries are stored row-major, so `data()[i * dim() + j]` is element (i, j).
/// Values are immutable once built; arithmetic returns new operators.
class Operator {
 public:
  Operator() = default;
  explicit Operator(Matrix m);

  static Operator zero(std::size_t dim);
  static Operator identity(std::size_t dim);
  /// Builds from `dim * dim` row-major entries; throws InvalidInput on a size mismatch.
  static Operator from_entries(std::size_t dim, const std::vector<cplx>& entries);
  /// |i><j| in the computational basis.
  static Operator basis(std::size_t dim, std::size_t i, std::size_t j);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  const cplx* data() const noexcept { return m_.data(); }
  cplx operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  Operator adjoint() const;
  cplx trace() const;
  /// Largest absolute entry.
  double max_abs() const;
  bool is_zero() const;

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(cplx s, const Operator& a);
  friend Operator operator-(const Operator& a);

 private:
  Matrix m_;
};

/// max |a_ij - b_ij|; dimensions must agree.
double max_abs_diff(const Operator& a, const Operator& b);

/// L rho L^dag - 1/2 {L^dag L, rho}.
Operator lindblad_dissipator(const Operator& l, const Operator& rho);

/// ab - ba.
Operator commutator(const Operator& a, const Operator& b);

/// Hilbert-Schmidt pairing Tr[rho^dag x].
cplx expectation(const Operator& rho, const Operator& x);

/// Hermiticity defect max |h - h^dag|.
double hermiticity_defect(const Operator& h);
/// Unitarity defect max |s^dag s - I|.
double unitarity_defect(const Operator& s);

/// Checks the usual density-matrix conditions (Hermitian, unit trace, PSD) to `tol`.
/// Throws InvalidInput with a description of the first violated condition.
void require_density_matrix(const Operator& rho, double tol = 1e-10);

/// Scattering, coupling and Hamiltonian operators for one field mode.
struct SLHTriple {
  Operator s;
  Operator l;
  Operator h;

  std::size_t dim() const noexcept { return h.dim(); }
  /// Throws InvalidInput unless dims agree, h is Hermitian and s unitary to `tol`.
  void validate(double tol = 1e-12) const;
};

/// Multi-mode (S_ij, L_i, H) description; `s[i][j]` is S_ij.
struct MultiModeSLH {
  std::vector<std::vector<Operator>> s;
  std::vector<Operator> l;
  Operator h;

  std::size_t modes() const noexcept { return l.size(); }
  std::size_t dim() const noexcept { return h.dim(); }
  /// Throws InvalidInput unless shapes agree, h is Hermitian and the block
  /// scattering matrix satisfies sum_k S_ik S_jk^dag = sum_k S_ki^dag S_kj = delta_ij I.
  void validate(double tol = 1e-12) const;

  static MultiModeSLH from_single(const SLHTriple& slh);
};

/// Largest eigenvalue of sum_i L_i^dag L_i, or 0 when every L_i vanishes.
double dominant_decay_rate(const MultiModeSLH& slh);

namespace two_level {
// Basis ordering: index 0 = |g>, index 1 = |e>.
Operator sigma_minus();
Operator sigma_plus();
Operator ground();
Operator excited();
/// H = 0, L = sqrt(gamma) sigma_-, S = I.
SLHTriple dipole(double gamma);
/// H = 0, L_i = sqrt(gamma_i) sigma_-, S = identity block matrix.
MultiModeSLH waveguide(double gamma_forward, double gamma_backward);
}  // namespace two_level

nlohmann::json to_json(const Operator& op);
/// Accepts {"dim": d, "entries": [[re, im], ...]}; throws InvalidInput on malformed input.
Operator operator_from_json(const nlohmann::json& j);

}  // namespace fockme
