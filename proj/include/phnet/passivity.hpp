// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "phnet/linalg.hpp"
#include "phnet/model.hpp"

namespace phnet {

enum class CertificateKind { SymP0, Impedance, Scattering, Closure, Network, Controller };

inline const char* to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::SymP0: return "sym_p0";
    case CertificateKind::Impedance: return "impedance";
    case CertificateKind::Scattering: return "scattering";
    case CertificateKind::Closure: return "closure";
    case CertificateKind::Network: return "network";
    case CertificateKind::Controller: return "controller";
  }
  return "unknown";
}

/// Outcome of a quadratic-form sign test.
///
/// `form` is the violating form F: the test passes iff F is negative
/// semidefinite up to `tol`. `margin` is the least eigenvalue of -F, so a
/// passing certificate has margin >= -tol. On failure `witness` satisfies
/// witness^* F witness > 0.
struct PassivityCertificate {
  CertificateKind kind = CertificateKind::Impedance;
  bool pass = false;
  bool marginal = false;
  double margin = 0.0;
  double tol = 0.0;
  std::optional<Vector> witness;
  Matrix form;
  std::string note;
};

namespace detail {

inline PassivityCertificate certify_nsd(CertificateKind kind, const Matrix& violating, double scale) {
  PassivityCertificate c;
  c.kind = kind;
  c.form = linalg::hermitian_part(violating);
  c.tol = kRelTol * std::max(1.0, scale);
  if (c.form.rows() == 0) {
    c.pass = true;
    c.marginal = true;
    return c;
  }
  const auto top = linalg::max_eigen(c.form);
  c.margin = -top.value;
  c.pass = top.value <= c.tol;
  c.marginal = c.pass && std::abs(top.value) <= c.tol;
  if (!c.pass) c.witness = top.vector;
  return c;
}

}  // namespace detail

/// Pointwise test Sym P_0(zeta) <= 0 on the 256-point grid plus `extra_grid`.
inline PassivityCertificate check_sym_p0(const PHSubsystem& s, const std::vector<double>& extra_grid = {}) {
  check_structure(s);
  Matrix worst = Matrix::Zero(s.dim, s.dim);
  double worst_value = -std::numeric_limits<double>::infinity();
  double worst_at = 0.0;
  for (double z : sample_grid(extra_grid)) {
    const Matrix sym = linalg::hermitian_part(s.p0_at_unit(z));
    const double v = linalg::max_eigen(sym).value;
    if (v > worst_value) {
      worst_value = v;
      worst = sym;
      worst_at = z;
    }
  }
  auto c = detail::certify_nsd(CertificateKind::SymP0, worst, s.p0.empty() ? 0.0 : s.p0.max_abs());
  c.note = "worst sample at unit coordinate " + std::to_string(worst_at);
  return c;
}

namespace detail {

inline PassivityCertificate fail_on_p0(CertificateKind kind, PassivityCertificate p0) {
  p0.kind = kind;
  p0.note = "Sym P_0 is not negative semidefinite; witness is a pointwise vector in K^d";
  return p0;
}

inline void require_square_ports(const PHSubsystem& s, const char* what) {
  if (!s.has_square_ports())
    throw StructuralError(std::string(what) + " needs W_B and W_C with N*d rows each");
}

}  // namespace detail

/// Re<Ax, x> <= Re<Bx, Cx> for all x, i.e. 1/2 Q - Sym(W_C^* W_B) <= 0.
inline PassivityCertificate check_impedance(const PHSubsystem& s) {
  detail::require_square_ports(s, "impedance test");
  auto p0 = check_sym_p0(s);
  if (!p0.pass) return detail::fail_on_p0(CertificateKind::Impedance, std::move(p0));
  const Matrix q = flux_form(s).q;
  const Matrix wb = s.unit_w_b(), wc = s.unit_w_c();
  const Matrix supply = linalg::hermitian_part(wc.adjoint() * wb);
  return detail::certify_nsd(CertificateKind::Impedance, 0.5 * q - supply,
                             0.5 * linalg::spectral_norm(q) + linalg::spectral_norm(supply));
}

/// Re<Ax, x> <= |Bx|^2 - |Cx|^2 for all x.
inline PassivityCertificate check_scattering(const PHSubsystem& s) {
  detail::require_square_ports(s, "scattering test");
  auto p0 = check_sym_p0(s);
  if (!p0.pass) return detail::fail_on_p0(CertificateKind::Scattering, std::move(p0));
  const Matrix q = flux_form(s).q;
  const Matrix wb = s.unit_w_b(), wc = s.unit_w_c();
  const Matrix gb = wb.adjoint() * wb, gc = wc.adjoint() * wc;
  return detail::certify_nsd(CertificateKind::Scattering, 0.5 * q - gb + gc,
                             0.5 * linalg::spectral_norm(q) + linalg::spectral_norm(gb) + linalg::spectral_norm(gc));
}

/// Dissipativity of A = 𝔄 restricted to ker(𝔅 - K ℭ). `form` is 1/2 Q in trace
/// coordinates of the subsystem normalised to (0, 1); the witness lies in the
/// constraint kernel.
inline PassivityCertificate check_dissipative_closure(const PHSubsystem& s, const Matrix& k_mat) {
  check_structure(s);
  if (k_mat.rows() != s.input_size() || k_mat.cols() != s.output_size())
    throw StructuralError("closure matrix K must be (rows of W_B) x (rows of W_C)");
  auto p0 = check_sym_p0(s);
  if (!p0.pass) return detail::fail_on_p0(CertificateKind::Closure, std::move(p0));

  const Matrix q = flux_form(s).q;
  const Matrix constraint = s.unit_w_b() - k_mat * s.unit_w_c();
  const auto ns = linalg::null_space(constraint);
  const Matrix& z = ns.basis;
  auto c = detail::certify_nsd(CertificateKind::Closure, 0.5 * z.adjoint() * q * z, 0.5 * linalg::spectral_norm(q));
  c.form = 0.5 * q;
  if (c.witness) c.witness = (z * *c.witness).eval();
  if (z.cols() != s.port_size())
    c.note = "warning: constraint kernel has dimension " + std::to_string(z.cols()) + ", expected " +
             std::to_string(s.port_size()) + " (closure is not a graph over the outputs)";
  return c;
}

}  // namespace phnet
