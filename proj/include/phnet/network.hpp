// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "phnet/linalg.hpp"
#include "phnet/model.hpp"
#include "phnet/passivity.hpp"

namespace phnet {

/// x_c' = A_c x_c + B_c u_c,  y_c = C_c x_c + D_c u_c, with <x, z>_{X_c} = z^* W x.
struct Controller {
  std::string name;
  Matrix a_c;
  Matrix b_c;
  Matrix c_c;
  Matrix d_c;
  Matrix state_weight;

  Index states() const { return a_c.rows(); }
  Index ports() const { return b_c.cols(); }
};

inline void check_structure(const Controller& c) {
  const Index n = c.a_c.rows(), m = c.b_c.cols();
  auto fail = [&](const std::string& what) {
    throw StructuralError((c.name.empty() ? std::string("controller") : c.name) + ": " + what);
  };
  if (c.a_c.cols() != n) fail("A_c must be square");
  if (c.b_c.rows() != n) fail("B_c must have n_c rows");
  if (c.c_c.rows() != m || c.c_c.cols() != n) fail("C_c must be m_u x n_c");
  if (c.d_c.rows() != m || c.d_c.cols() != m) fail("D_c must be m_u x m_u");
  if (c.state_weight.rows() != n || c.state_weight.cols() != n) fail("state_weight must be n_c x n_c");
  if (linalg::max_abs(Matrix(c.state_weight - c.state_weight.adjoint())) > 1e-12 * linalg::max_abs(c.state_weight))
    fail("state_weight must be Hermitian");
  if (n > 0 && linalg::min_eigen(c.state_weight).value <= kRelTol * linalg::spectral_norm(c.state_weight))
    fail("state_weight must be positive definite");
}

/// Supply-rate form of a controller that is closed by u_c = ℭ, 𝔅 = -y_c:
/// on (x_c, u_c) the form is
///   [ Sym(W A_c)            1/2 (W B_c - C_c^*) ]
///   [ 1/2 (W B_c - C_c^*)^*  -Sym D_c           ]
/// and passivity means it is negative semidefinite.
inline Matrix controller_supply_form(const Controller& c) {
  const Index n = c.states(), m = c.ports();
  Matrix f = Matrix::Zero(n + m, n + m);
  f.topLeftCorner(n, n) = linalg::hermitian_part(c.state_weight * c.a_c);
  const Matrix cross = 0.5 * (c.state_weight * c.b_c - c.c_c.adjoint());
  f.topRightCorner(n, m) = cross;
  f.bottomLeftCorner(m, n) = cross.adjoint();
  f.bottomRightCorner(m, m) = -linalg::hermitian_part(c.d_c);
  return f;
}

/// Passivity of the controller plus the largest eps with
///   form + eps * blockdiag(0, Pi) <= 0,   Pi = projector onto range(D_c^*).
struct ControllerPassivity {
  PassivityCertificate certificate;
  double strict_input_margin = 0.0;
  Matrix pi;
};

inline ControllerPassivity check_controller(const Controller& c) {
  check_structure(c);
  ControllerPassivity out;
  const Matrix f = controller_supply_form(c);
  out.certificate = detail::certify_nsd(CertificateKind::Controller, f, linalg::spectral_norm(f));
  const Index n = c.states(), m = c.ports();
  const auto ker = linalg::null_space(c.d_c);  // ker D_c = range(D_c^*)^perp
  out.pi = Matrix::Identity(m, m) - linalg::projector(ker.basis);
  if (!out.certificate.pass || linalg::max_abs(out.pi) == 0.0) return out;
  Matrix lift = Matrix::Zero(n + m, n + m);
  lift.bottomRightCorner(m, m) = out.pi;
  double lo = 0.0, hi = 2.0 * std::max(1.0, linalg::spectral_norm(f));
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (linalg::max_eigen(Matrix(f + mid * lift)).value <= out.certificate.tol)
      lo = mid;
    else
      hi = mid;
  }
  out.strict_input_margin = lo;
  return out;
}

/// Subsystems, controllers and the static interconnection 𝔅 = K ℭ - S(C_c x_c + D_c S^T ℭ).
///
/// Port indices refer to rows of the stacked inputs 𝔅 = (𝔅^1, ..., 𝔅^m) and the
/// stacked outputs ℭ = (ℭ^1, ..., ℭ^m). A controller port attached to index i
/// reads ℭ_i and drives 𝔅_i.
struct Network {
  std::vector<PHSubsystem> subsystems;
  std::vector<Controller> controllers;
  Matrix k_mat;
  std::vector<std::vector<Index>> coupling;  // coupling[c][p]: global port of controller c, port p
  std::vector<Index> external_ports;          // rows of 𝔅 reserved for external inputs (held at zero)
  std::vector<std::vector<Index>> clusters;   // block partition of subsystems for serial detection

  Index total_inputs() const {
    Index p = 0;
    for (const auto& s : subsystems) p += s.input_size();
    return p;
  }
  Index total_outputs() const {
    Index q = 0;
    for (const auto& s : subsystems) q += s.output_size();
    return q;
  }
  Index controller_states() const {
    Index n = 0;
    for (const auto& c : controllers) n += c.states();
    return n;
  }
};

/// Block form of the closed loop on z = (tau, x_c):
///   constraint     g_tau tau + g_c x_c = 0
///   controller     x_c' = a_c x_c + b_tau tau
/// with every subsystem normalised to (0, 1).
struct ClosedLoopDescription {
  std::vector<Index> trace_offset;   // per subsystem, into the stacked trace
  std::vector<Index> input_offset;   // per subsystem, into 𝔅
  std::vector<Index> output_offset;  // per subsystem, into ℭ
  std::vector<Index> controller_offset;
  Index trace_size = 0;
  Index controller_states = 0;
  Matrix w_b;  // blockdiag unit W_B^j
  Matrix w_c;  // blockdiag unit W_C^j
  Matrix q;    // blockdiag Q_j
  Matrix select;  // S: total inputs x total controller ports
  Matrix k_eff;   // K - S D_c S^T
  Matrix g_tau;
  Matrix g_c;
  Matrix a_c;
  Matrix b_tau;
  Matrix c_c;
  Matrix controller_weight;

  Matrix constraint() const {
    Matrix g(g_tau.rows(), trace_size + controller_states);
    g << g_tau, g_c;
    return g;
  }
};

namespace detail {

inline void check_network_structure(const Network& net) {
  if (net.subsystems.empty()) throw StructuralError("network has no subsystems");
  for (const auto& s : net.subsystems) check_structure(s);
  for (const auto& c : net.controllers) check_structure(c);
  const Index p = net.total_inputs(), q = net.total_outputs();
  Index nd = 0;
  for (const auto& s : net.subsystems) nd += s.port_size();
  if (p != nd) throw StructuralError("stacked input dimension " + std::to_string(p) + " differs from sum N_j d_j = " + std::to_string(nd));
  if (net.k_mat.rows() != p || net.k_mat.cols() != q)
    throw StructuralError("k_mat must be " + std::to_string(p) + " x " + std::to_string(q));
  if (net.coupling.size() != net.controllers.size())
    throw StructuralError("coupling must list ports for every controller");
  std::vector<int> used(static_cast<std::size_t>(std::max(p, q)), 0);
  for (std::size_t c = 0; c < net.controllers.size(); ++c) {
    if (static_cast<Index>(net.coupling[c].size()) != net.controllers[c].ports())
      throw StructuralError("controller " + std::to_string(c) + " port count differs from its coupling list");
    for (Index i : net.coupling[c]) {
      if (i < 0 || i >= std::min(p, q))
        throw StructuralError("controller " + std::to_string(c) + " attached to nonexistent port " + std::to_string(i));
      if (used[static_cast<std::size_t>(i)]++)
        throw StructuralError("port " + std::to_string(i) + " is attached to more than one controller port");
    }
  }
  for (Index e : net.external_ports)
    if (e < 0 || e >= p) throw StructuralError("external port " + std::to_string(e) + " out of range");
}

}  // namespace detail

inline ClosedLoopDescription assemble(const Network& net) {
  detail::check_network_structure(net);
  ClosedLoopDescription d;
  std::vector<Matrix> wb, wc, qs;
  Index t = 0, p = 0, q = 0;
  for (const auto& s : net.subsystems) {
    d.trace_offset.push_back(t);
    d.input_offset.push_back(p);
    d.output_offset.push_back(q);
    t += s.trace_size();
    p += s.input_size();
    q += s.output_size();
    wb.push_back(s.unit_w_b());
    wc.push_back(s.unit_w_c());
    qs.push_back(flux_form(s).q);
  }
  d.trace_size = t;
  d.w_b = linalg::block_diag(wb);
  d.w_c = linalg::block_diag(wc);
  d.q = linalg::block_diag(qs);

  Index nc = 0, mu = 0;
  std::vector<Matrix> ac, bc, cc, dc, wgt;
  for (const auto& c : net.controllers) {
    d.controller_offset.push_back(nc);
    nc += c.states();
    mu += c.ports();
    ac.push_back(c.a_c);
    bc.push_back(c.b_c);
    cc.push_back(c.c_c);
    dc.push_back(c.d_c);
    wgt.push_back(c.state_weight);
  }
  d.controller_states = nc;
  d.a_c = linalg::block_diag(ac);
  d.c_c = linalg::block_diag(cc);
  d.controller_weight = linalg::block_diag(wgt);
  const Matrix b_blk = linalg::block_diag(bc);
  const Matrix d_blk = linalg::block_diag(dc);

  d.select = Matrix::Zero(p, mu);
  Matrix select_out = Matrix::Zero(q, mu);
  Index col = 0;
  for (const auto& ports : net.coupling)
    for (Index i : ports) {
      d.select(i, col) = 1.0;
      select_out(i, col) = 1.0;
      ++col;
    }
  d.k_eff = net.k_mat - d.select * d_blk * select_out.transpose();
  d.g_tau = d.w_b - d.k_eff * d.w_c;
  d.g_c = d.select * d.c_c;
  d.b_tau = b_blk * select_out.transpose() * d.w_c;
  return d;
}

/// Re<Â x̂, x̂> = 1/2 tau^* Q tau + Re<A_c x_c + B_c u_c, x_c>_{X_c} + P_0 terms.
/// The boundary and controller part is tested on the constraint kernel; the
/// P_0 part pointwise.
inline PassivityCertificate certify_network_dissipative(const Network& net) {
  const auto d = assemble(net);
  for (std::size_t j = 0; j < net.subsystems.size(); ++j) {
    auto p0 = check_sym_p0(net.subsystems[j]);
    if (!p0.pass) {
      p0.kind = CertificateKind::Network;
      p0.note = "subsystem " + std::to_string(j) + ": Sym P_0 is not negative semidefinite";
      return p0;
    }
  }
  const Index t = d.trace_size, nc = d.controller_states;
  Matrix f = Matrix::Zero(t + nc, t + nc);
  f.topLeftCorner(t, t) = 0.5 * d.q;
  if (nc > 0) {
    const Matrix cross = d.controller_weight * d.b_tau;
    f.bottomLeftCorner(nc, t) = 0.5 * cross;
    f.topRightCorner(t, nc) = 0.5 * cross.adjoint();
    f.bottomRightCorner(nc, nc) = linalg::hermitian_part(d.controller_weight * d.a_c);
  }
  const auto ns = linalg::null_space(d.constraint());
  const Matrix& z = ns.basis;
  auto c = detail::certify_nsd(CertificateKind::Network, z.adjoint() * f * z, linalg::spectral_norm(f));
  c.form = linalg::hermitian_part(f);
  if (c.witness) c.witness = (z * *c.witness).eval();
  if (ns.rank != d.g_tau.rows())
    c.note = "warning: constraint rank " + std::to_string(ns.rank) + " below row count " + std::to_string(d.g_tau.rows());
  return c;
}

// ---------------------------------------------------------------------------
// Serial structure

struct SerialStructure {
  std::vector<std::size_t> ordering;             // block indices, upstream first
  std::vector<std::vector<std::size_t>> blocks;  // subsystem indices per block
  std::vector<std::vector<Matrix>> k_blocks;     // K^{ij} in the original block numbering
  std::vector<std::size_t> local_closures;       // blocks with a nonzero diagonal K^{ii}
};

struct NotSerial {
  std::vector<std::size_t> cycle;  // block indices b_0 -> b_1 -> ... -> b_0
  std::vector<std::vector<std::size_t>> blocks;
};

using SerialDetection = std::variant<SerialStructure, NotSerial>;

/// Reorders the blocks so that K_eff is strictly lower block triangular.
/// Edge i -> j means the inputs of block j read outputs of block i. Diagonal
/// blocks are local boundary closures and do not create edges. A controller
/// attached to ports of several blocks couples them in both directions.
inline SerialDetection detect_serial_structure(const Network& net) {
  const auto d = assemble(net);
  std::vector<std::vector<std::size_t>> blocks;
  if (net.clusters.empty()) {
    for (std::size_t j = 0; j < net.subsystems.size(); ++j) blocks.push_back({j});
  } else {
    std::vector<int> seen(net.subsystems.size(), 0);
    for (const auto& cl : net.clusters) {
      std::vector<std::size_t> b;
      for (Index j : cl) {
        if (j < 0 || static_cast<std::size_t>(j) >= net.subsystems.size() || seen[static_cast<std::size_t>(j)]++)
          throw StructuralError("clusters must partition the subsystems");
        b.push_back(static_cast<std::size_t>(j));
      }
      blocks.push_back(std::move(b));
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw StructuralError("clusters must partition the subsystems");
  }
  const std::size_t nb = blocks.size();

  std::vector<std::vector<Index>> rows(nb), cols(nb);
  std::vector<std::size_t> row_block(static_cast<std::size_t>(net.total_inputs()));
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t j : blocks[b]) {
      const auto& s = net.subsystems[j];
      for (Index r = 0; r < s.input_size(); ++r) {
        rows[b].push_back(d.input_offset[j] + r);
        row_block[static_cast<std::size_t>(d.input_offset[j] + r)] = b;
      }
      for (Index c = 0; c < s.output_size(); ++c) cols[b].push_back(d.output_offset[j] + c);
    }

  std::vector<std::vector<Matrix>> kb(nb, std::vector<Matrix>(nb));
  std::vector<std::vector<char>> edge(nb, std::vector<char>(nb, 0));
  std::vector<std::size_t> local;
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      Matrix blk(static_cast<Index>(rows[i].size()), static_cast<Index>(cols[j].size()));
      for (std::size_t r = 0; r < rows[i].size(); ++r)
        for (std::size_t c = 0; c < cols[j].size(); ++c)
          blk(static_cast<Index>(r), static_cast<Index>(c)) = net.k_mat(rows[i][r], cols[j][c]);
      const bool nonzero = linalg::max_abs(blk) != 0.0;
      if (nonzero && i == j) local.push_back(i);
      if (nonzero && i != j) edge[j][i] = 1;
      kb[i][j] = std::move(blk);
    }
  for (const auto& ports : net.coupling) {
    std::vector<std::size_t> touched;
    for (Index p : ports) touched.push_back(row_block[static_cast<std::size_t>(p)]);
    for (std::size_t a : touched)
      for (std::size_t b : touched)
        if (a != b) edge[a][b] = 1;
  }

  std::vector<int> indeg(nb, 0);
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nb; ++j) indeg[j] += edge[i][j];
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < nb; ++i)
    if (indeg[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t j = 0; j < nb; ++j)
      if (edge[i][j] && --indeg[j] == 0) ready.push(j);
  }
  if (order.size() == nb) return SerialStructure{order, blocks, kb, local};

  // Every remaining vertex has an incoming edge from another remaining vertex,
  // so walking predecessors must revisit a vertex.
  std::vector<char> done(nb, 0);
  for (std::size_t i : order) done[i] = 1;
  std::size_t v = 0;
  while (done[v]) ++v;
  std::vector<std::size_t> path;
  std::vector<int> pos(nb, -1);
  while (pos[v] < 0) {
    pos[v] = static_cast<int>(path.size());
    path.push_back(v);
    std::size_t pred = 0;
    while (done[pred] || !edge[pred][v]) ++pred;
    v = pred;
  }
  std::vector<std::size_t> cycle(path.begin() + pos[v], path.end());
  std::reverse(cycle.begin(), cycle.end());
  return NotSerial{cycle, blocks};
}

}  // namespace phnet
