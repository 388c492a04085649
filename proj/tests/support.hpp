#pragma once

// Shared helpers for the unit tests: seeded random operators and states.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "fockme/operators.hpp"

namespace fockme::testing {

using Rng = std::mt19937_64;

inline cplx random_cplx(Rng& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng)};
}

inline Operator random_operator(Rng& rng, std::size_t d) {
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = random_cplx(rng);
  return Operator(m);
}

inline Operator random_hermitian(Rng& rng, std::size_t d) {
  Operator a = random_operator(rng, d);
  return cplx(0.5) * (a + a.adjoint());
}

inline Operator random_density(Rng& rng, std::size_t d) {
  Operator a = random_operator(rng, d);
  Operator p = a * a.adjoint();
  return cplx(1.0 / p.trace().real()) * p;
}

inline Operator random_unitary(Rng& rng, std::size_t d) {
  Matrix m = random_operator(rng, d).matrix();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr{Eigen::MatrixXcd(m)};
  Eigen::MatrixXcd q = qr.householderQ();
  return Operator(Matrix(q));
}

/// Random two-level SLH triple with nonzero coupling.
inline SLHTriple random_slh(Rng& rng) {
  return {random_unitary(rng, 2), random_operator(rng, 2), random_hermitian(rng, 2)};
}

}  // namespace fockme::testing
