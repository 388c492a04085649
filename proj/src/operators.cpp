#include "fockme/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fockme/errors.hpp"

namespace fockme {

namespace {

void require_same_dim(const Operator& a, const Operator& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw InvalidInput(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                       " vs " + std::to_string(b.dim()) + ")");
  }
}

}  // namespace

Operator::Operator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidInput("Operator: matrix must be square");
}

Operator Operator::zero(std::size_t dim) { return Operator(Matrix::Zero(dim, dim)); }

Operator Operator::identity(std::size_t dim) { return Operator(Matrix::Identity(dim, dim)); }

Operator Operator::from_entries(std::size_t dim, const std::vector<cplx>& entries) {
  if (dim == 0) throw InvalidInput("Operator: dim must be positive");
  if (entries.size() != dim * dim) {
    throw InvalidInput("Operator: expected " + std::to_string(dim * dim) + " entries, got " +
                       std::to_string(entries.size()));
  }
  Matrix m(dim, dim);
  std::copy(entries.begin(), entries.end(), m.data());
  return Operator(std::move(m));
}

Operator Operator::basis(std::size_t dim, std::size_t i, std::size_t j) {
  Matrix m = Matrix::Zero(dim, dim);
  m(i, j) = 1.0;
  return Operator(std::move(m));
}

Operator Operator::adjoint() const { return Operator(m_.adjoint()); }

cplx Operator::trace() const { return m_.trace(); }

double Operator::max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

bool Operator::is_zero() const { return max_abs() == 0.0; }

Operator operator+(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "operator+");
  return Operator(a.m_ + b.m_);
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "operator-");
  return Operator(a.m_ - b.m_);
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "operator*");
  return Operator(a.m_ * b.m_);
}

Operator operator*(cplx s, const Operator& a) { return Operator(s * a.m_); }

Operator operator-(const Operator& a) { return Operator(-a.m_); }

double max_abs_diff(const Operator& a, const Operator& b) { return (a - b).max_abs(); }

Operator lindblad_dissipator(const Operator& l, const Operator& rho) {
  require_same_dim(l, rho, "lindblad_dissipator");
  const Matrix& L = l.matrix();
  const Matrix& R = rho.matrix();
  const Matrix ldl = L.adjoint() * L;
  return Operator(L * R * L.adjoint() - 0.5 * (ldl * R + R * ldl));
}

Operator commutator(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "commutator");
  return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

cplx expectation(const Operator& rho, const Operator& x) {
  require_same_dim(rho, x, "expectation");
  // Tr[rho^dag x] = sum_ij conj(rho_ij) x_ij
  return rho.matrix().conjugate().cwiseProduct(x.matrix()).sum();
}

double hermiticity_defect(const Operator& h) { return max_abs_diff(h, h.adjoint()); }

double unitarity_defect(const Operator& s) {
  return max_abs_diff(s.adjoint() * s, Operator::identity(s.dim()));
}

void require_density_matrix(const Operator& rho, double tol) {
  if (rho.dim() == 0) throw InvalidInput("density matrix: empty operator");
  if (hermiticity_defect(rho) > tol) throw InvalidInput("density matrix: not Hermitian");
  if (std::abs(rho.trace() - 1.0) > tol) throw InvalidInput("density matrix: trace is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(rho.matrix()),
                                                     Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw InvalidInput("density matrix: negative eigenvalue " +
                       std::to_string(es.eigenvalues().minCoeff()));
  }
}

void SLHTriple::validate(double tol) const {
  if (h.dim() == 0) throw InvalidInput("SLH: empty Hamiltonian");
  if (s.dim() != h.dim() || l.dim() != h.dim()) throw InvalidInput("SLH: operators must share dim");
  if (hermiticity_defect(h) > tol) throw InvalidInput("SLH: h is not Hermitian");
  if (unitarity_defect(s) > tol) throw InvalidInput("SLH: s is not unitary");
}

void MultiModeSLH::validate(double tol) const {
  const std::size_t n = modes();
  const std::size_t d = dim();
  if (n == 0 || d == 0) throw InvalidInput("MultiModeSLH: needs at least one mode and dim > 0");
  if (s.size() != n) throw InvalidInput("MultiModeSLH: s must be modes x modes");
  for (const auto& row : s) {
    if (row.size() != n) throw InvalidInput("MultiModeSLH: s must be modes x modes");
    for (const auto& op : row) {
      if (op.dim() != d) throw InvalidInput("MultiModeSLH: S_ij dim mismatch");
    }
  }
  for (const auto& op : l) {
    if (op.dim() != d) throw InvalidInput("MultiModeSLH: L_i dim mismatch");
  }
  if (hermiticity_defect(h) > tol) throw InvalidInput("MultiModeSLH: h is not Hermitian");

  const Matrix eye = Matrix::Identity(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Matrix rows = Matrix::Zero(d, d);
      Matrix cols = Matrix::Zero(d, d);
      for (std::size_t k = 0; k < n; ++k) {
        rows += s[i][k].matrix() * s[j][k].matrix().adjoint();
        cols += s[k][i].matrix().adjoint() * s[k][j].matrix();
      }
      const Matrix target = (i == j) ? eye : Matrix::Zero(d, d);
      if ((rows - target).cwiseAbs().maxCoeff() > tol ||
          (cols - target).cwiseAbs().maxCoeff() > tol) {
        throw InvalidInput("MultiModeSLH: scattering matrix is not unitary");
      }
    }
  }
}

MultiModeSLH MultiModeSLH::from_single(const SLHTriple& slh) {
  return MultiModeSLH{{{slh.s}}, {slh.l}, slh.h};
}

double dominant_decay_rate(const MultiModeSLH& slh) {
  const std::size_t d = slh.dim();
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& l : slh.l) sum += l.matrix().adjoint() * l.matrix();
  if (sum.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sum, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

namespace two_level {

Operator sigma_minus() { return Operator::basis(2, 0, 1); }
Operator sigma_plus() { return Operator::basis(2, 1, 0); }
Operator ground() { return Operator::basis(2, 0, 0); }
Operator excited() { return Operator::basis(2, 1, 1); }

SLHTriple dipole(double gamma) {
  return SLHTriple{Operator::identity(2), cplx(std::sqrt(gamma)) * sigma_minus(),
                   Operator::zero(2)};
}

MultiModeSLH waveguide(double gamma_forward, double gamma_backward) {
  const Operator eye = Operator::identity(2);
  const Operator zero = Operator::zero(2);
  return MultiModeSLH{{{eye, zero}, {zero, eye}},
                      {cplx(std::sqrt(gamma_forward)) * sigma_minus(),
                       cplx(std::sqrt(gamma_backward)) * sigma_minus()},
                      Operator::zero(2)};
}

}  // namespace two_level

nlohmann::json to_json(const Operator& op) {
  nlohmann::json entries = nlohmann::json::array();
  const std::size_t n = op.dim() * op.dim();
  for (std::size_t k = 0; k < n; ++k) {
    entries.push_back({op.data()[k].real(), op.data()[k].imag()});
  }
  return {{"dim", op.dim()}, {"entries", std::move(entries)}};
}

Operator operator_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries")) {
    throw InvalidInput("operator JSON needs \"dim\" and \"entries\"");
  }
  if (!j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
    throw InvalidInput("operator JSON: \"dim\" must be a positive integer");
  }
  const auto dim = j["dim"].get<std::size_t>();
  if (!j["entries"].is_array()) throw InvalidInput("operator JSON: \"entries\" must be an array");
  std::vector<cplx> entries;
  entries.reserve(j["entries"].size());
  for (const auto& e : j["entries"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw InvalidInput("operator JSON: each entry must be [re, im]");
    }
    entries.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return Operator::from_entries(dim, entries);
}

}  // namespace fockme
