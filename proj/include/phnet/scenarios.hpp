// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "phnet/model.hpp"
#include "phnet/network.hpp"

namespace phnet {

/// Scalar coefficient given as polynomial coefficients in the physical coordinate.
struct Profile {
  std::vector<double> coeffs{1.0};

  static Profile constant(double v) { return Profile{{v}}; }
  double operator()(double z) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
  }
  bool is_constant() const { return coeffs.size() <= 1; }
};

namespace detail {

/// One row of a boundary map: coefficient `c` at trace index `i`.
using Row = std::vector<std::pair<Index, double>>;

inline Matrix port_rows(Index trace_size, const std::vector<Row>& rows) {
  Matrix w = Matrix::Zero(static_cast<Index>(rows.size()), trace_size);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [i, c] : rows[r]) w(static_cast<Index>(r), i) += c;
  return w;
}

inline constexpr int kSamplesH = 257;

/// H = diag(1 / inertia, stiffness) as a constant or sampled density.
inline MatrixFunction diagonal_density(const Profile& inertia, const Profile& stiffness, double a, double b,
                                       const std::string& what) {
  auto at = [&](double z) {
    const double r = inertia(z), t = stiffness(z);
    if (!(r > 0) || !(t > 0)) throw StructuralError(what + ": coefficients must be positive");
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 1.0 / r;
    h(1, 1) = t;
    return h;
  };
  if (inertia.is_constant() && stiffness.is_constant()) return MatrixFunction::constant(at(a));
  std::vector<Matrix> samples;
  for (int i = 0; i < kSamplesH; ++i) samples.push_back(at(a + (b - a) * i / (kSamplesH - 1.0)));
  return MatrixFunction::sampled(std::move(samples));
}

// Wave trace (order 1, dim 2) with e = (v, sigma) = (omega_t, T omega_z).
inline constexpr Index kV1 = 0, kS1 = 1, kV0 = 2, kS0 = 3;
// Beam trace (order 2, dim 2) with e = (omega_t, EI omega_zz).
inline constexpr Index kE1R = 0, kE2R = 1, kD1R = 2, kD2R = 3, kE1L = 4, kE2L = 5, kD1L = 6, kD2L = 7;

}  // namespace detail

/// Wave equation rho omega_tt = (T omega_z)_z in energy variables
/// x = (rho omega_t, omega_z): P_1 = [[0, 1], [1, 0]], H = diag(1/rho, T).
inline PHSubsystem wave_subsystem(std::string name, const Profile& rho, const Profile& tension, double a, double b,
                                  const std::vector<detail::Row>& wb, const std::vector<detail::Row>& wc) {
  PHSubsystem s;
  s.name = std::move(name);
  s.order = 1;
  s.dim = 2;
  Matrix p1 = Matrix::Zero(2, 2);
  p1(0, 1) = p1(1, 0) = 1.0;
  s.principal = {p1};
  s.hamiltonian = detail::diagonal_density(rho, tension, a, b, s.name);
  s.a = a;
  s.b = b;
  s.w_b = detail::port_rows(4, wb);
  s.w_c = detail::port_rows(4, wc);
  return s;
}

/// Euler-Bernoulli beam rho omega_tt = -(EI omega_zz)_zz in energy variables
/// x = (rho omega_t, omega_zz): P_2 = [[0, -1], [1, 0]], H = diag(1/rho, EI).
inline PHSubsystem beam_subsystem(std::string name, const Profile& rho, const Profile& ei, double a, double b,
                                  const std::vector<detail::Row>& wb, const std::vector<detail::Row>& wc) {
  PHSubsystem s;
  s.name = std::move(name);
  s.order = 2;
  s.dim = 2;
  Matrix p2 = Matrix::Zero(2, 2);
  p2(0, 1) = -1.0;
  p2(1, 0) = 1.0;
  s.principal = {Matrix::Zero(2, 2), p2};
  s.hamiltonian = detail::diagonal_density(rho, ei, a, b, s.name);
  s.a = a;
  s.b = b;
  s.w_b = detail::port_rows(8, wb);
  s.w_c = detail::port_rows(8, wc);
  return s;
}

// ---------------------------------------------------------------------------
// Chain of strings

struct ChainOfStringsSpec {
  int m = 3;
  std::vector<Profile> rho;      // per segment; empty means all 1
  std::vector<Profile> tension;  // per segment; empty means all 1
  std::vector<double> kappa{0.5, 0.0, 0.0};
  std::vector<double> joints;  // m + 1 increasing points; empty means 0, 1, ..., m
  bool serial_form = true;     // false: feedback form with the 2m x 2m pattern matrix
  bool paper_literal_sign = false;
};

inline Network build_chain(const ChainOfStringsSpec& spec) {
  const int m = spec.m;
  if (m < 1) throw StructuralError("chain needs at least one segment");
  if (static_cast<int>(spec.kappa.size()) != m) throw StructuralError("chain needs kappa^0 .. kappa^{m-1}");
  if (!(spec.kappa[0] > 0)) throw StructuralError("chain requires kappa^0 > 0");
  for (double k : spec.kappa)
    if (k < 0) throw StructuralError("chain requires kappa^j >= 0");
  if (!spec.rho.empty() && static_cast<int>(spec.rho.size()) != m) throw StructuralError("chain needs one rho per segment");
  if (!spec.tension.empty() && static_cast<int>(spec.tension.size()) != m)
    throw StructuralError("chain needs one T per segment");
  std::vector<double> joints = spec.joints;
  if (joints.empty())
    for (int j = 0; j <= m; ++j) joints.push_back(j);
  if (static_cast<int>(joints.size()) != m + 1) throw StructuralError("chain needs m + 1 joint positions");

  using namespace detail;
  const double k0 = spec.paper_literal_sign ? -spec.kappa[0] : spec.kappa[0];
  Network net;
  for (int j = 0; j < m; ++j) {
    const Profile rho = spec.rho.empty() ? Profile{} : spec.rho[static_cast<std::size_t>(j)];
    const Profile t = spec.tension.empty() ? Profile{} : spec.tension[static_cast<std::size_t>(j)];
    std::vector<Row> wb, wc;
    const bool first = j == 0, last = j == m - 1;
    if (!spec.serial_form) {
      wb = {{{kS0, -1.0}}, last ? Row{{kS1, 1.0}} : Row{{kV1, 1.0}}};
      wc = {{{kV0, 1.0}}, last ? Row{{kV1, 1.0}} : Row{{kS1, 1.0}}};
    } else if (first && last) {
      wb = {{{kS0, 1.0}, {kV0, -k0}}, {{kS1, 1.0}}};
      wc = {{{kV0, 1.0}}, {{kV1, 1.0}}};
    } else if (first) {
      wb = {{{kS0, 1.0}, {kV0, -k0}}};
      wc = {{{kV0, 1.0}}, {{kV1, 1.0}}, {{kS1, 1.0}}};
    } else if (last) {
      wb = {{{kV0, 1.0}}, {{kS0, 1.0}}, {{kS1, 1.0}}};
      wc = {{{kV1, 1.0}}};
    } else {
      wb = {{{kV0, 1.0}}, {{kS0, 1.0}}};
      wc = {{{kV1, 1.0}}, {{kS1, 1.0}}};
    }
    net.subsystems.push_back(wave_subsystem("string" + std::to_string(j + 1), rho, t, joints[static_cast<std::size_t>(j)],
                                            joints[static_cast<std::size_t>(j) + 1], wb, wc));
  }

  const Index p = 2 * Index{m};
  net.k_mat = Matrix::Zero(p, p);
  if (!spec.serial_form) {
    net.k_mat(0, 0) = -k0;
    for (int j = 1; j < m; ++j) {
      net.k_mat(2 * j - 1, 2 * j) = 1.0;
      net.k_mat(2 * j, 2 * j - 1) = -1.0;
      net.k_mat(2 * j, 2 * j) = -spec.kappa[static_cast<std::size_t>(j)];
    }
    return net;
  }
  // Block j + 1 reads (v^j(1), sigma^j(1) + kappa_j v^j(1)) from block j.
  Index row = 1, col_prev = 1;  // outputs of block 1 are (v(0), v(1), sigma(1))
  for (int j = 1; j < m; ++j) {
    const double kj = spec.kappa[static_cast<std::size_t>(j)];
    net.k_mat(row, col_prev) = 1.0;
    net.k_mat(row + 1, col_prev + 1) = 1.0;
    net.k_mat(row + 1, col_prev) = kj;
    row += 2;
    col_prev = (j == 1 ? 3 : col_prev + 2);
  }
  return net;
}

// ---------------------------------------------------------------------------
// Euler-Bernoulli beam

enum class BeamEnd { Pinned, Free, ShearHinge, Clamped, Bc5, Bc6 };

inline const char* to_string(BeamEnd e) {
  switch (e) {
    case BeamEnd::Pinned: return "pinned";
    case BeamEnd::Free: return "free";
    case BeamEnd::ShearHinge: return "shear_hinge";
    case BeamEnd::Clamped: return "clamped";
    case BeamEnd::Bc5: return "bc5";
    case BeamEnd::Bc6: return "bc6";
  }
  return "";
}

inline BeamEnd beam_end_from_string(const std::string& s) {
  for (BeamEnd e : {BeamEnd::Pinned, BeamEnd::Free, BeamEnd::ShearHinge, BeamEnd::Clamped, BeamEnd::Bc5, BeamEnd::Bc6})
    if (s == to_string(e)) return e;
  throw StructuralError("unknown beam boundary condition '" + s + "'");
}

struct EulerBernoulliSpec {
  Profile rho;
  Profile ei;
  /// Dissipative left end (EI omega_zz(0), -(EI omega_zz)_z(0)) = K_0 (omega_tz(0), omega_t(0)).
  /// Ignored when `left_pinned` is set.
  Matrix k0 = Matrix::Identity(2, 2);
  bool left_pinned = false;
  BeamEnd right = BeamEnd::Pinned;
};

namespace detail {

/// Right-end ports (input rows, output rows) whose product is the right-end
/// power e2 e1' - e1 e2' and whose input rows vanish under the condition.
inline std::pair<std::vector<Row>, std::vector<Row>> beam_right_ports(BeamEnd e) {
  switch (e) {
    case BeamEnd::Pinned:
    case BeamEnd::Bc5:
      return {{{{kE1R, 1.0}}, {{kE2R, 1.0}}}, {{{kD2R, -1.0}}, {{kD1R, 1.0}}}};
    case BeamEnd::Free:
      return {{{{kE2R, 1.0}}, {{kD2R, -1.0}}}, {{{kD1R, 1.0}}, {{kE1R, 1.0}}}};
    case BeamEnd::ShearHinge:
    case BeamEnd::Bc6:
      return {{{{kD1R, 1.0}}, {{kD2R, -1.0}}}, {{{kE2R, 1.0}}, {{kE1R, 1.0}}}};
    case BeamEnd::Clamped:
      return {{{{kD1R, 1.0}}, {{kE1R, 1.0}}}, {{{kE2R, 1.0}}, {{kD2R, -1.0}}}};
  }
  return {};
}

}  // namespace detail

inline void check_k0(const Matrix& k0) {
  if (k0.rows() != 2 || k0.cols() != 2) throw StructuralError("K_0 must be 2 x 2");
  const bool first_class = k0(0, 0).real() > 0 && k0(0, 0).imag() == 0.0 && k0(0, 1) == Scalar(0) &&
                           k0(1, 0) == Scalar(0) && k0(1, 1) == Scalar(0);
  const bool second_class = linalg::min_eigen(k0).value > kRelTol * std::max(1.0, linalg::spectral_norm(k0));
  if (!first_class && !second_class)
    throw StructuralError("K_0 must be either diag(k, 0) with k > 0 or have positive definite Hermitian part");
}

inline Network build_beam(const EulerBernoulliSpec& spec) {
  using namespace detail;
  auto [wb, wc] = beam_right_ports(spec.right);
  std::vector<Row> left_b, left_c;
  Matrix k_left;
  if (spec.left_pinned) {
    left_b = {{{kE1L, 1.0}}, {{kE2L, 1.0}}};
    left_c = {{{kD2L, 1.0}}, {{kD1L, -1.0}}};
    k_left = Matrix::Zero(2, 2);
  } else {
    check_k0(spec.k0);
    left_b = {{{kE2L, -1.0}}, {{kD2L, 1.0}}};
    left_c = {{{kD1L, 1.0}}, {{kE1L, 1.0}}};
    k_left = -spec.k0;
  }
  left_b.insert(left_b.end(), wb.begin(), wb.end());
  left_c.insert(left_c.end(), wc.begin(), wc.end());
  Network net;
  net.subsystems.push_back(beam_subsystem("beam", spec.rho, spec.ei, 0.0, 1.0, left_b, left_c));
  net.k_mat = Matrix::Zero(4, 4);
  net.k_mat.topLeftCorner(2, 2) = k_left;
  return net;
}

// ---------------------------------------------------------------------------
// String coupled to a beam

enum class CoupledVariant { DamperStringBeam, SpringMassDamperStringBeam };

struct CoupledSpec {
  CoupledVariant variant = CoupledVariant::DamperStringBeam;
  Profile rho, tension;          // string
  Profile beam_rho, beam_ei;     // beam
  double kappa = 1.0;            // damper variant
  double mass = 1.0, spring = 1.0, damping = 1.0;  // spring-mass variant
};

/// Tip mass-spring-damper m w_tt(0) = -k w(0) - r w_t(0) + T w_z(0) with
/// x_c = (w(0), w_t(0)) and energy 1/2 (k |x_1|^2 + m |x_2|^2).
inline Controller mass_spring_damper(double m, double k, double r) {
  if (!(m > 0) || !(k > 0) || !(r > 0)) throw StructuralError("mass-spring-damper requires m, k, r > 0");
  Controller c;
  c.name = "mass_spring_damper";
  c.a_c = Matrix::Zero(2, 2);
  c.a_c(0, 1) = 1.0;
  c.a_c(1, 0) = -k / m;
  c.a_c(1, 1) = -r / m;
  c.b_c = Matrix::Zero(2, 1);
  c.b_c(1, 0) = 1.0 / m;
  c.c_c = Matrix::Zero(1, 2);
  c.c_c(0, 1) = 1.0;
  c.d_c = Matrix::Zero(1, 1);
  c.state_weight = Matrix::Zero(2, 2);
  c.state_weight(0, 0) = k;
  c.state_weight(1, 1) = m;
  return c;
}

/// String ports (-v(0), sigma(1)) / (sigma(0), v(1)); beam ports
/// (e1(0), e2(0), e1(1), e2(1)) / (e2'(0), -e1'(0), -e2'(1), e1'(1)).
/// Joint: e1(0) = v(1), e2'(0) = -sigma(1), e2(0) = 0; beam pinned at 1.
inline Network build_coupled(const CoupledSpec& spec) {
  using namespace detail;
  Network net;
  net.subsystems.push_back(wave_subsystem("string", spec.rho, spec.tension, 0.0, 1.0, {{{kV0, -1.0}}, {{kS1, 1.0}}},
                                          {{{kS0, 1.0}}, {{kV1, 1.0}}}));
  net.subsystems.push_back(beam_subsystem("beam", spec.beam_rho, spec.beam_ei, 0.0, 1.0,
                                          {{{kE1L, 1.0}}, {{kE2L, 1.0}}, {{kE1R, 1.0}}, {{kE2R, 1.0}}},
                                          {{{kD2L, 1.0}}, {{kD1L, -1.0}}, {{kD2R, -1.0}}, {{kD1R, 1.0}}}));
  net.k_mat = Matrix::Zero(6, 6);
  net.k_mat(1, 2) = -1.0;
  net.k_mat(2, 1) = 1.0;
  if (spec.variant == CoupledVariant::DamperStringBeam) {
    if (!(spec.kappa > 0)) throw StructuralError("damper-string-beam requires kappa > 0");
    net.k_mat(0, 0) = -1.0 / spec.kappa;
  } else {
    net.controllers.push_back(mass_spring_damper(spec.mass, spec.spring, spec.damping));
    net.coupling = {{0}};
  }
  return net;
}

// ---------------------------------------------------------------------------
// Small reference systems

/// Single string rho = T = 1 with sigma(0) = kappa v(0) and a free right end.
inline Network build_damped_wave(double kappa = 0.5) {
  using namespace detail;
  if (!(kappa > 0)) throw StructuralError("damped wave requires kappa > 0");
  Network net;
  net.subsystems.push_back(
      wave_subsystem("string", {}, {}, 0.0, 1.0, {{{kS0, -1.0}}, {{kS1, 1.0}}}, {{{kV0, 1.0}}, {{kV1, 1.0}}}));
  net.k_mat = Matrix::Zero(2, 2);
  net.k_mat(0, 0) = -kappa;
  return net;
}

/// Conservative string with sigma(0) = sigma(1) = 0.
inline Network build_free_wave() {
  using namespace detail;
  Network net;
  net.subsystems.push_back(
      wave_subsystem("string", {}, {}, 0.0, 1.0, {{{kS0, -1.0}}, {{kS1, 1.0}}}, {{{kV0, 1.0}}, {{kV1, 1.0}}}));
  net.k_mat = Matrix::Zero(2, 2);
  return net;
}

/// String with a tip mass-spring-damper at 0 and a free end at 1. Dissipative
/// and asymptotically stable, but the damping of mode omega decays like
/// 1 / omega^2, so the resolvent grows along the imaginary axis.
inline Network build_tip_mass_string(double m = 1.0, double k = 1.0, double r = 1.0) {
  using namespace detail;
  Network net;
  net.subsystems.push_back(
      wave_subsystem("string", {}, {}, 0.0, 1.0, {{{kV0, -1.0}}, {{kS1, 1.0}}}, {{{kS0, 1.0}}, {{kV1, 1.0}}}));
  net.k_mat = Matrix::Zero(2, 2);
  net.controllers.push_back(mass_spring_damper(m, k, r));
  net.coupling = {{0}};
  return net;
}

// ---------------------------------------------------------------------------
// Registry

struct ScenarioInfo {
  std::string name;
  std::string description;
  bool conservative = false;
  std::function<Network()> build;
};

inline const std::vector<ScenarioInfo>& scenario_registry() {
  static const std::vector<ScenarioInfo> reg = {
      {"chain", "three strings, damped left end, serial port form", false, [] { return build_chain({}); }},
      {"chain_feedback", "three strings, damped left end, 6x6 feedback form", false,
       [] {
         ChainOfStringsSpec s;
         s.serial_form = false;
         return build_chain(s);
       }},
      {"damped_wave", "single string, sigma(0) = 0.5 v(0), free right end", false, [] { return build_damped_wave(0.5); }},
      {"free_wave", "single string, free-free, conservative", true, [] { return build_free_wave(); }},
      {"beam_pinned", "Euler-Bernoulli beam, pinned-pinned, conservative", true,
       [] {
         EulerBernoulliSpec s;
         s.left_pinned = true;
         return build_beam(s);
       }},
      {"beam_damped", "Euler-Bernoulli beam, K_0 = diag(1, 0) at 0, clamped at 1", false,
       [] {
         EulerBernoulliSpec s;
         s.k0 = Matrix::Zero(2, 2);
         s.k0(0, 0) = 1.0;
         s.right = BeamEnd::Clamped;
         return build_beam(s);
       }},
      {"damper_string_beam", "damped string joined to a pinned beam", false, [] { return build_coupled({}); }},
      {"spring_mass_damper_string_beam", "string with tip mass-spring-damper joined to a pinned beam", false,
       [] {
         CoupledSpec s;
         s.variant = CoupledVariant::SpringMassDamperStringBeam;
         return build_coupled(s);
       }},
      {"tip_mass_string", "string with tip mass-spring-damper, free right end (slow high-frequency decay)", false,
       [] { return build_tip_mass_string(); }},
  };
  return reg;
}

inline const ScenarioInfo& find_scenario(const std::string& name) {
  for (const auto& s : scenario_registry())
    if (s.name == name) return s;
  throw StructuralError("unknown scenario '" + name + "'");
}

}  // namespace phnet
