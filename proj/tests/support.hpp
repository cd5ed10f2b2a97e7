// SPDX-License-Identifier: Apache-2.0
// Shared helpers for the test binaries: random systems and independent oracles.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "phnet/phnet.hpp"

namespace phnet::testing {

using Rng = std::mt19937_64;

inline double gauss(Rng& rng) { return std::normal_distribution<double>()(rng); }
inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Matrix random_matrix(Rng& rng, Index r, Index c, bool complex) {
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = Scalar(gauss(rng), complex ? gauss(rng) : 0.0);
  return m;
}

/// Random matrix with Hermitian part <= 0.
inline Matrix random_nsd_sym(Rng& rng, Index n, bool complex, double damping = 1.0) {
  const Matrix a = random_matrix(rng, n, n, complex);
  const Matrix r = random_matrix(rng, n, n, complex);
  return 0.5 * (a - a.adjoint()) - damping * r * r.adjoint() / static_cast<double>(n);
}

/// Gauss-Legendre rule on [0, 1] from the Golub-Welsch eigenproblem.
struct Quadrature {
  std::vector<double> x, w;
};

inline Quadrature gauss_legendre(int n) {
  RealMatrix j = RealMatrix::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(j);
  Quadrature q;
  for (int i = 0; i < n; ++i) {
    q.x.push_back(0.5 * (es.eigenvalues()(i) + 1.0));
    q.w.push_back(std::pow(es.eigenvectors()(0, i), 2));  // weights on [-1, 1] are 2 v0^2, halved
  }
  return q;
}

/// Vector polynomial y(z) = sum_m c.col(m) z^m.
struct VecPoly {
  Matrix c;  // d x (deg + 1)

  Vector derivative(int k, double z) const {
    Vector out = Vector::Zero(c.rows());
    for (Index m = k; m < c.cols(); ++m) {
      double f = 1.0;
      for (int i = 0; i < k; ++i) f *= static_cast<double>(m - i);
      out += c.col(m) * (f * std::pow(z, static_cast<double>(m - k)));
    }
    return out;
  }
};

inline VecPoly random_poly(Rng& rng, Index d, int deg, bool complex) { return {random_matrix(rng, d, deg + 1, complex)}; }

/// Trace of y in the library's ordering, built directly from the polynomial.
inline Vector poly_trace(const VecPoly& y, int order) {
  const Index d = y.c.rows();
  Vector t(2 * order * d);
  for (int k = 0; k < order; ++k) {
    t.segment(k * d, d) = y.derivative(k, 1.0);
    t.segment((order + k) * d, d) = y.derivative(k, 0.0);
  }
  return t;
}

/// P_1..P_N with P_k^* = (-1)^{k+1} P_k and a well conditioned P_N.
inline std::vector<Matrix> random_principal(Rng& rng, int order, Index d, bool complex) {
  std::vector<Matrix> p;
  for (int k = 1; k <= order; ++k) {
    const Matrix a = random_matrix(rng, d, d, complex);
    p.push_back(k % 2 == 1 ? Matrix(0.5 * (a + a.adjoint())) : Matrix(0.5 * (a - a.adjoint())));
  }
  const Matrix u = random_matrix(rng, d, d, complex).householderQr().householderQ();
  Matrix diag = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    const double mag = 1.0 + std::abs(gauss(rng));
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    if (order % 2 == 1)
      diag(i, i) = sign * mag;
    else if (complex)
      diag(i, i) = Scalar(0.0, sign * mag);
    else
      diag(i, i) = 0.0;
  }
  if (order % 2 == 0 && !complex) {
    // real skew-symmetric and invertible needs d even: 2x2 rotation blocks
    for (Index i = 0; i + 1 < d; i += 2) {
      const double mag = 1.0 + std::abs(gauss(rng));
      diag(i, i + 1) = mag;
      diag(i + 1, i) = -mag;
    }
  }
  p.back() = u * diag * u.adjoint();
  return p;
}

/// Coercive H(z) = H0 + z H1 with H0 >= 1/2, H1 >= 0.
inline MatrixFunction random_density(Rng& rng, Index d, bool complex) {
  const Matrix b = random_matrix(rng, d, d, complex), c = random_matrix(rng, d, d, complex);
  Matrix h0 = b * b.adjoint() / static_cast<double>(d);
  h0.diagonal().array() += 0.5;
  const Matrix h1 = 0.3 * c * c.adjoint() / static_cast<double>(d);
  return MatrixFunction::polynomial({h0, h1});
}

/// Ports making the subsystem impedance passive: with 1/2 Q = |f|^2 - |e|^2,
/// W_B = T (f + e) and W_C = T^{-*} ((f - e) + D (f + e)) with Sym D >= 0.
inline void passive_ports(Rng& rng, PHSubsystem& s, bool complex, double extra_damping) {
  const Matrix q = flux_form(s).q;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * q);
  const Index t = s.trace_size(), p = s.port_size();
  // eigenvalues ascending: first p negative, last p positive
  Matrix e(p, t), f(p, t);
  for (Index i = 0; i < p; ++i) {
    e.row(i) = std::sqrt(-es.eigenvalues()(i)) * es.eigenvectors().col(i).adjoint();
    f.row(i) = std::sqrt(es.eigenvalues()(t - 1 - i)) * es.eigenvectors().col(t - 1 - i).adjoint();
  }
  Matrix tr = random_matrix(rng, p, p, complex);
  tr.diagonal().array() += 3.0;
  const Matrix dmp = extra_damping * -random_nsd_sym(rng, p, complex, 1.0).adjoint();
  const Matrix wb_unit = tr * (f + e);
  const Matrix wc_unit = tr.adjoint().inverse() * ((f - e) + dmp * (f + e));
  // convert unit-interval maps to physical ones: W = W_unit * l * S^{-1}
  const Matrix sinv = s.trace_scaling().inverse();
  s.w_b = wb_unit * s.length() * sinv;
  s.w_c = wc_unit * s.length() * sinv;
}

struct RandomSubsystemOptions {
  int order = 1;
  Index dim = 2;
  bool complex = false;
  bool with_p0 = true;
  bool unit_interval = false;
  double extra_damping = 0.0;
};

inline PHSubsystem random_passive_subsystem(Rng& rng, const RandomSubsystemOptions& o) {
  PHSubsystem s;
  s.name = "random";
  s.order = o.order;
  s.dim = static_cast<int>(o.dim);
  s.principal = random_principal(rng, o.order, o.dim, o.complex);
  s.hamiltonian = random_density(rng, o.dim, o.complex);
  if (o.with_p0) s.p0 = MatrixFunction::constant(random_nsd_sym(rng, o.dim, o.complex, 0.5));
  if (!o.unit_interval) {
    s.a = uniform(rng, 0.0, 1.0);
    s.b = s.a + uniform(rng, 0.5, 2.0);
  }
  passive_ports(rng, s, o.complex, o.extra_damping);
  return s;
}

/// Random Network of impedance-passive subsystems closed by K with Sym K <= 0.
inline Network random_passive_network(Rng& rng, int subsystems, bool complex) {
  Network net;
  for (int j = 0; j < subsystems; ++j) {
    RandomSubsystemOptions o;
    o.order = pick(rng, 1, 2);
    o.complex = complex;
    o.dim = (o.order == 2 && !complex) ? 2 : pick(rng, 1, 2);
    o.extra_damping = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : 0.5;
    net.subsystems.push_back(random_passive_subsystem(rng, o));
  }
  const Index p = net.total_inputs();
  net.k_mat = random_nsd_sym(rng, p, complex, uniform(rng, 0.0, 1.0) < 0.3 ? 0.0 : 1.0);
  return net;
}

}  // namespace phnet::testing
