// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "phnet/linalg.hpp"
#include "phnet/model.hpp"
#include "phnet/network.hpp"

namespace phnet {

/// Legendre-Gauss-Lobatto collocation on (0, 1).
struct SubsystemGrid {
  int n = 0;
  RealVector points;   // increasing, points(0) = 0, points(n-1) = 1
  RealVector weights;  // sum to 1, exact for polynomials of degree <= 2n - 3
  RealMatrix diff;     // d/dzeta on the nodal values of a degree n-1 polynomial
  RealMatrix legendre;  // legendre(k, i) = P_k(2 z_i - 1)
  RealVector gamma;     // discrete norms of P_k under the quadrature on [-1, 1]
};

inline SubsystemGrid make_grid(int n) {
  if (n < 3) throw StructuralError("grid needs at least 3 points");
  const int deg = n - 1;
  RealVector x(n);
  for (int i = 0; i < n; ++i) x(i) = -std::cos(std::numbers::pi * i / deg);
  RealMatrix p(n, n);  // p(i, k) = P_k(x_i)
  RealVector prev;
  for (int it = 0; it < 100; ++it) {
    prev = x;
    p.col(0).setOnes();
    p.col(1) = x;
    for (int k = 2; k <= deg; ++k)
      p.col(k) = ((2.0 * k - 1.0) * x.cwiseProduct(p.col(k - 1)) - (k - 1.0) * p.col(k - 2)) / k;
    x = prev - (x.cwiseProduct(p.col(deg)) - p.col(deg - 1)).cwiseQuotient(n * p.col(deg));
    if ((x - prev).cwiseAbs().maxCoeff() < 1e-16) break;
  }
  p.col(0).setOnes();
  p.col(1) = x;
  for (int k = 2; k <= deg; ++k)
    p.col(k) = ((2.0 * k - 1.0) * x.cwiseProduct(p.col(k - 1)) - (k - 1.0) * p.col(k - 2)) / k;

  SubsystemGrid g;
  g.n = n;
  g.points = (x.array() + 1.0) / 2.0;
  const RealVector pn = p.col(deg);
  RealVector w = (2.0 / (deg * (deg + 1.0) * pn.array().square())).matrix();
  g.weights = w / 2.0;
  g.diff = RealMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      g.diff(i, j) = pn(i) / (pn(j) * (x(i) - x(j)));
      row += g.diff(i, j);
    }
    g.diff(i, i) = -row;
  }
  g.diff *= 2.0;
  g.legendre = p.transpose();
  g.gamma.resize(n);
  for (int k = 0; k < n; ++k) g.gamma(k) = 2.0 / (2.0 * k + 1.0);
  g.gamma(deg) = 2.0 / deg;
  return g;
}

/// Discrete operators of one subsystem on nodal values, component-major
/// (index c * n + i).
struct SubsystemDiscretization {
  SubsystemGrid grid;
  Matrix h_block;  // nodal H, so y = h_block * x samples H x
  Matrix l;        // discrete 𝔄
  Matrix m;        // energy Gram: x^* m x = int x^* H x
  Matrix t;        // trace rows: t * x = tau(H x) on (0, 1)
  Matrix p0_form;  // quadrature of Sym P_0 on y samples
};

inline SubsystemDiscretization discretize_subsystem(const PHSubsystem& s, int n) {
  check_structure(s);
  const int order = s.order, d = s.dim;
  if (n < 4 * order + 4)
    throw StructuralError("n = " + std::to_string(n) + " is below the minimum 4N + 4 = " + std::to_string(4 * order + 4));
  SubsystemDiscretization out;
  out.grid = make_grid(n);
  const auto& g = out.grid;
  const Index nd = Index{n} * d;

  out.h_block = Matrix::Zero(nd, nd);
  Matrix p0b = Matrix::Zero(nd, nd);
  const bool has_p0 = !s.p0.empty();
  for (int i = 0; i < n; ++i) {
    const Matrix h = s.unit_hamiltonian_at(g.points(i));
    const Matrix p0 = has_p0 ? s.unit_p0_at(g.points(i)) : Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        out.h_block(Index{a} * n + i, Index{b} * n + i) = h(a, b);
        p0b(Index{a} * n + i, Index{b} * n + i) = p0(a, b);
      }
  }

  std::vector<Matrix> dpow{Matrix::Identity(n, n)};
  for (int k = 1; k <= order; ++k) dpow.push_back(dpow.back() * g.diff.cast<Scalar>());

  Matrix op = p0b;
  for (int k = 1; k <= order; ++k) {
    const Matrix pk = s.unit_P(k);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (pk(a, b) != Scalar(0)) op.block(Index{a} * n, Index{b} * n, n, n) += pk(a, b) * dpow[k];
  }
  out.l = op * out.h_block;

  Matrix wdiag = Matrix::Zero(nd, nd);
  for (int c = 0; c < d; ++c)
    for (int i = 0; i < n; ++i) wdiag(Index{c} * n + i, Index{c} * n + i) = g.weights(i);
  out.m = linalg::hermitian_part(wdiag * out.h_block);
  out.p0_form = linalg::hermitian_part(wdiag * p0b);

  out.t = Matrix::Zero(s.trace_size(), nd);
  for (int k = 0; k < order; ++k)
    for (int c = 0; c < d; ++c) {
      out.t.block(trace_index(order, d, 1, k, c), Index{c} * n, 1, n) = dpow[k].row(n - 1);
      out.t.block(trace_index(order, d, 0, k, c), Index{c} * n, 1, n) = dpow[k].row(0);
    }
  out.t = out.t * out.h_block;
  return out;
}

/// The constrained closed-loop generator reduced to the constraint kernel.
///
/// Full coordinates stack the nodal values of every subsystem followed by the
/// controller states. With Z an orthonormal kernel basis of the constraint G,
///   m_red = Z^* M Z,  a_red = m_red^{-1} Z^* M L Z.
/// The "sim frame" uses y = R x_red with m_red = R^* R, in which the energy is
/// 1/2 |y|^2 and the generator is a_sim = R a_red R^{-1}.
struct DiscreteGenerator {
  std::vector<SubsystemDiscretization> parts;
  std::vector<Index> state_offset;  // per subsystem, into the full vector
  Index controller_offset = 0;
  Index full_size = 0;
  ClosedLoopDescription closed_loop;
  Matrix l_full;
  Matrix m_full;
  Matrix t_full;  // stacked traces of all subsystems
  Matrix g;       // constraint rows on the full vector
  Matrix lift;    // Z
  Matrix m_red;
  Matrix a_red;
  Matrix chol_r;      // upper triangular R
  Matrix chol_r_inv;
  Matrix a_sim;
  double numerical_range_max = 0.0;  // max Re of the field of values of a_sim
  double constraint_residual = 0.0;  // |G Z| / |G|
  bool real_coefficients = false;

  Index reduced_size() const { return a_red.rows(); }

  /// Full coordinates of a sim-frame vector.
  Matrix full_from_sim(const Matrix& y) const { return lift * (chol_r_inv * y); }

  /// Sim-frame coordinates of the M-orthogonal projection of x onto the kernel.
  Vector sim_from_full(const Vector& x) const {
    const Vector rhs = lift.adjoint() * (m_full * x);
    return chol_r * m_red.ldlt().solve(rhs);
  }
};

namespace detail {

/// Finds the first subsystem whose constraint rows do not add full rank.
inline std::string offending_block(const Network& net, const ClosedLoopDescription& d, const Matrix& g) {
  Index rows = 0;
  for (std::size_t j = 0; j < net.subsystems.size(); ++j) {
    const Index next = rows + net.subsystems[j].input_size();
    if (linalg::rank(g.topRows(next)) < next) {
      const auto& nm = net.subsystems[j].name;
      return "subsystem " + std::to_string(j) + (nm.empty() ? "" : " (" + nm + ")");
    }
    rows = next;
  }
  (void)d;
  return "unknown block";
}

}  // namespace detail

inline DiscreteGenerator assemble_generator(const Network& net, const std::vector<int>& n_per_subsystem) {
  DiscreteGenerator gen;
  gen.closed_loop = assemble(net);
  const auto& d = gen.closed_loop;
  if (n_per_subsystem.size() != net.subsystems.size())
    throw StructuralError("need one grid size per subsystem");

  std::vector<Matrix> ls, ms, ts;
  Index off = 0;
  for (std::size_t j = 0; j < net.subsystems.size(); ++j) {
    gen.parts.push_back(discretize_subsystem(net.subsystems[j], n_per_subsystem[j]));
    gen.state_offset.push_back(off);
    off += gen.parts.back().l.rows();
    ls.push_back(gen.parts.back().l);
    ms.push_back(gen.parts.back().m);
    ts.push_back(gen.parts.back().t);
  }
  const Index nc = d.controller_states;
  gen.controller_offset = off;
  gen.full_size = off + nc;
  gen.t_full = linalg::block_diag(ts);

  gen.l_full = Matrix::Zero(gen.full_size, gen.full_size);
  gen.l_full.topLeftCorner(off, off) = linalg::block_diag(ls);
  gen.m_full = Matrix::Zero(gen.full_size, gen.full_size);
  gen.m_full.topLeftCorner(off, off) = linalg::block_diag(ms);
  if (nc > 0) {
    gen.l_full.bottomLeftCorner(nc, off) = d.b_tau * gen.t_full;
    gen.l_full.bottomRightCorner(nc, nc) = d.a_c;
    gen.m_full.bottomRightCorner(nc, nc) = d.controller_weight;
  }

  gen.g = Matrix::Zero(d.g_tau.rows(), gen.full_size);
  gen.g.leftCols(off) = d.g_tau * gen.t_full;
  if (nc > 0) gen.g.rightCols(nc) = d.g_c;

  const auto ns = linalg::null_space(gen.g);
  if (ns.rank < gen.g.rows())
    throw StructuralError("discrete constraint matrix is rank deficient (rank " + std::to_string(ns.rank) + " of " +
                          std::to_string(gen.g.rows()) + "); offending block: " + detail::offending_block(net, d, gen.g));
  gen.lift = ns.basis;
  const double gnorm = linalg::spectral_norm(gen.g);
  gen.constraint_residual = gnorm > 0 ? linalg::spectral_norm(gen.g * gen.lift) / gnorm : 0.0;

  gen.m_red = linalg::hermitian_part(gen.lift.adjoint() * gen.m_full * gen.lift);
  Eigen::LLT<Matrix> llt(gen.m_red);
  if (llt.info() != Eigen::Success) throw NumericalError("reduced energy Gram matrix is not positive definite");
  const Matrix ml = gen.lift.adjoint() * gen.m_full * gen.l_full * gen.lift;
  gen.a_red = llt.solve(ml);
  gen.chol_r = llt.matrixU();
  const Index r = gen.m_red.rows();
  gen.chol_r_inv = gen.chol_r.triangularView<Eigen::Upper>().solve(Matrix::Identity(r, r));
  // R a_red R^{-1} = R^{-*} (Z^* M L Z) R^{-1}
  gen.a_sim = gen.chol_r_inv.adjoint() * ml * gen.chol_r_inv;
  gen.numerical_range_max = linalg::max_eigen(gen.a_sim).value;

  bool real = true;
  for (const auto& s : net.subsystems) real = real && s.is_real();
  for (const auto& c : net.controllers)
    real = real && linalg::is_real(c.a_c) && linalg::is_real(c.b_c) && linalg::is_real(c.c_c) &&
           linalg::is_real(c.d_c) && linalg::is_real(c.state_weight);
  gen.real_coefficients = real && linalg::is_real(net.k_mat);
  return gen;
}

inline DiscreteGenerator assemble_generator(const Network& net, int n = 48) {
  return assemble_generator(net, std::vector<int>(net.subsystems.size(), n));
}

}  // namespace phnet
