// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <variant>

#include "support.hpp"

using namespace phnet;
using namespace phnet::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double nearest_distance(const std::vector<Scalar>& ev, Scalar target) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& z : ev) best = std::min(best, std::abs(z - target));
  return best;
}

// 1: random impedance-passive subsystems under random Sym K <= 0.
Outcome criterion1() {
  Rng rng(20240601);
  int certified = 0, stable = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 200; ++trial) {
    const Network net = random_passive_network(rng, pick(rng, 1, 2), trial % 2 == 1);
    if (certify_network_dissipative(net).pass) ++certified;
    const auto sp = spectrum(assemble_generator(net, 32));
    worst = std::max(worst, sp.discrete_abscissa);
    if (sp.discrete_abscissa <= 1e-7) ++stable;
  }
  return {certified == 200 && stable == 200, "certified " + std::to_string(certified) + "/200, abscissa <= 1e-7 " +
                                                 std::to_string(stable) + "/200, worst " + fmt("%.3e", worst)};
}

// 2: flux identity against Gauss-Legendre quadrature of the volume integral.
Outcome criterion2() {
  Rng rng(77);
  const auto gl = gauss_legendre(64);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int order = 1 + trial % 4;
    const bool complex = (trial / 4) % 2 == 1;
    const Index d = (order % 2 == 0 && !complex) ? 2 : pick(rng, 1, 3);
    const auto p = random_principal(rng, order, d, complex);
    const Matrix a0 = random_matrix(rng, d, d, complex), a1 = random_matrix(rng, d, d, complex);
    const MatrixFunction p0 = MatrixFunction::polynomial({a0, a1});
    const VecPoly y = random_poly(rng, d, order + pick(rng, 0, 5), complex);

    double volume = 0.0, p0_term = 0.0, scale = 1.0;
    for (std::size_t q = 0; q < gl.x.size(); ++q) {
      const double z = gl.x[q];
      const Vector y0 = y.derivative(0, z);
      Vector acc = Vector::Zero(d);
      for (int k = 1; k <= order; ++k) {
        const Vector yk = y.derivative(k, z);
        acc += p[static_cast<std::size_t>(k - 1)] * yk;
        scale += gl.w[q] * p[static_cast<std::size_t>(k - 1)].norm() * y0.norm() * yk.norm();
      }
      const Matrix p0z = p0.at(z);
      volume += gl.w[q] * y0.dot(acc + p0z * y0).real();
      p0_term += gl.w[q] * y0.dot(p0z * y0).real();
    }
    EndpointDerivatives ep;
    for (int k = 0; k < order; ++k) {
      ep.right.push_back(y.derivative(k, 1.0));
      ep.left.push_back(y.derivative(k, 0.0));
    }
    const Vector tau = trace(order, static_cast<int>(d), ep).values;
    const double boundary = 0.5 * tau.dot(flux_form(order, static_cast<int>(d), p).q * tau).real();
    worst = std::max(worst, std::abs(volume - boundary - p0_term) / scale);
  }
  return {worst <= 1e-9, "max scaled |Re<Ax,x> - 1/2 tau*Q tau - P0 term| = " + fmt("%.3e", worst)};
}

// 3: damped string eigenvalues against the characteristic equation.
Outcome criterion3() {
  const double kappa = 0.5;
  const auto sp = spectrum(assemble_generator(build_damped_wave(kappa), 64));
  const auto ev = sp.resolved_eigenvalues();
  const double re = 0.5 * std::log((1.0 - kappa) / (1.0 + kappa));
  double worst = 0.0;
  for (int k = 0; k <= 4; ++k) {
    const Scalar lam(re, std::numbers::pi * k);
    if (std::abs(std::exp(2.0 * lam) - (1.0 - kappa) / (1.0 + kappa)) > 1e-12) return {false, "oracle root check failed"};
    worst = std::max(worst, nearest_distance(ev, lam));
  }
  return {worst <= 1e-6, "max |lambda_k - oracle|, k = 0..4: " + fmt("%.3e", worst)};
}

// 4: chain of three strings with Lipschitz coefficients.
Outcome criterion4() {
  ChainOfStringsSpec spec;
  spec.rho.assign(3, Profile{{1.0, 0.1}});
  spec.tension.assign(3, Profile{{1.0, 0.05}});
  spec.kappa = {0.5, 0.0, 0.0};
  const Network net = build_chain(spec);
  const bool cert = certify_network_dissipative(net).pass;
  const bool serial = std::holds_alternative<SerialStructure>(detect_serial_structure(net));
  const auto g = assemble_generator(net, 48);
  const auto sp = spectrum(g);
  SimulateOptions opt;
  opt.record_traces = false;
  const auto tr = simulate(g, net, initial_state(g, "sine"), 5e-3, 40.0, opt);
  const auto fit = decay_fit(tr);
  const double rel = std::abs(fit.eta - 2.0 * sp.abscissa) / std::abs(fit.eta);
  const bool ok = cert && serial && sp.abscissa < -1e-4 && fit.eta < -1e-4 && rel <= 0.1;
  return {ok, std::string("certified ") + (cert ? "yes" : "no") + ", serial " + (serial ? "yes" : "no") +
                  ", abscissa " + fmt("%.5f", sp.abscissa) + ", eta " + fmt("%.5f", fit.eta) + ", M " +
                  fmt("%.3f", fit.m) + ", |eta - 2 abscissa| / |eta| " + fmt("%.4f", rel)};
}

bool monotone(const std::vector<double>& e, double rel) {
  for (std::size_t k = 1; k < e.size(); ++k)
    if (e[k] > e[k - 1] * (1.0 + rel)) return false;
  return true;
}

// 5: Euler-Bernoulli beam.
Outcome criterion5() {
  EulerBernoulliSpec pinned;
  pinned.left_pinned = true;
  const auto ev = spectrum(assemble_generator(build_beam(pinned), 64)).resolved_eigenvalues();
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const double w = std::pow(k * std::numbers::pi, 2);
    worst = std::max({worst, nearest_distance(ev, Scalar(0, w)), nearest_distance(ev, Scalar(0, -w))});
  }
  EulerBernoulliSpec damped;
  damped.k0 = Matrix::Zero(2, 2);
  damped.k0(0, 0) = 1.0;
  damped.right = BeamEnd::Clamped;
  const Network net = build_beam(damped);
  const auto g = assemble_generator(net, 48);
  const auto sp = spectrum(g);
  SimulateOptions opt;
  opt.record_traces = false;
  const auto tr = simulate(g, net, initial_state(g, "random:5"), 1e-3, 5.0, opt);
  const bool mono = monotone(tr.energies, 1e-12);
  const bool ok = worst <= 1e-5 && sp.abscissa < 0 && mono;
  return {ok, "pinned max |lambda - i(k pi)^2| " + fmt("%.3e", worst) + ", damped abscissa " + fmt("%.5f", sp.abscissa) +
                  ", energy monotone " + (mono ? "yes" : "no")};
}

// 6: spring-mass-damper controller joined to string and beam.
Outcome criterion6() {
  double eig_err = 0.0;
  for (const auto& [m, k, r] : std::vector<std::array<double, 3>>{{1, 1, 1}, {2, 3, 0.5}, {1, 1, 5}, {0.5, 2, 2}}) {
    const Controller c = mass_spring_damper(m, k, r);
    Eigen::ComplexEigenSolver<Matrix> es(c.a_c);
    const Scalar disc = std::sqrt(Scalar(r * r - 4 * k * m));
    const Scalar l1 = -(r + disc) / (2 * m), l2 = -(r - disc) / (2 * m);
    const Scalar e0 = es.eigenvalues()(0), e1 = es.eigenvalues()(1);
    const double err = std::min(std::max(std::abs(e0 - l1), std::abs(e1 - l2)), std::max(std::abs(e0 - l2), std::abs(e1 - l1)));
    eig_err = std::max(eig_err, err / std::max(1.0, std::abs(l1)));
  }

  CoupledSpec spec;
  spec.variant = CoupledVariant::SpringMassDamperStringBeam;
  const Network net = build_coupled(spec);
  const bool cert = certify_network_dissipative(net).pass;
  const auto g = assemble_generator(net, 48);
  const Matrix ml = g.m_full * g.l_full;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = g.full_from_sim(g.sim_from_full(initial_state(g, "random:" + std::to_string(1000 + trial))));
    const double energy = x.dot(g.m_full * x).real();
    const double rate = x.dot(ml * x).real() / energy;
    const double expected = -spec.damping * std::norm(x(g.controller_offset + 1)) / energy;
    worst = std::max(worst, std::abs(rate - expected));
  }
  const bool ok = eig_err <= 1e-14 && cert && worst <= 1e-8;
  return {ok, "controller eigenvalue error " + fmt("%.2e", eig_err) + ", certified " + (cert ? "yes" : "no") +
                  ", max |Re<Ax,x> + r|x_c2|^2| / |x|^2 " + fmt("%.3e", worst)};
}

// 7: Cayley steps never increase energy; conservative scenarios keep it.
Outcome criterion7() {
  int failures = 0;
  double worst_rise = 0.0, worst_drift = 0.0;
  for (const auto& info : scenario_registry()) {
    const Network net = info.build();
    const auto g = assemble_generator(net, 48);
    const Vector y0 = g.sim_from_full(initial_state(g, "random:11"));
    for (double dt : {1e-3, 1e-2, 1e-1}) {
      const CayleyStepper st(g.a_sim, dt);
      Vector y = y0;
      const double e0 = 0.5 * y.squaredNorm();
      double prev = e0;
      bool ok = true;
      for (int k = 0; k < 10000; ++k) {
        y = st.step(y);
        const double e = 0.5 * y.squaredNorm();
        worst_rise = std::max(worst_rise, (e - prev) / prev);
        if (e > prev * (1.0 + 1e-12)) ok = false;
        prev = e;
      }
      if (info.conservative) {
        const double drift = std::abs(prev - e0) / e0;
        worst_drift = std::max(worst_drift, drift);
        if (drift > 1e-10) ok = false;
      }
      if (!ok) {
        ++failures;
        std::printf("  criterion 7 failure: %s dt=%g\n", info.name.c_str(), dt);
      }
    }
  }
  return {failures == 0, std::to_string(scenario_registry().size()) + " scenarios x 3 steps, worst per-step rise " +
                             fmt("%.2e", worst_rise) + ", worst conservative drift " + fmt("%.2e", worst_drift)};
}

// 8: serial detection.
Outcome criterion8() {
  const auto chain = detect_serial_structure(build_chain({}));
  bool chain_ok = false;
  if (const auto* s = std::get_if<SerialStructure>(&chain)) chain_ok = s->ordering == std::vector<std::size_t>{0, 1, 2};

  // two strings feeding each other: B1 = -C2, B2 = C1
  Network gyr;
  for (int j = 0; j < 2; ++j)
    gyr.subsystems.push_back(wave_subsystem("string" + std::to_string(j), {}, {}, 0.0, 1.0,
                                                    {{{detail::kV0, -1.0}}, {{detail::kS1, 1.0}}},
                                                    {{{detail::kS0, 1.0}}, {{detail::kV1, 1.0}}}));
  gyr.k_mat = Matrix::Zero(4, 4);
  gyr.k_mat.topRightCorner(2, 2) = -Matrix::Identity(2, 2);
  gyr.k_mat.bottomLeftCorner(2, 2) = Matrix::Identity(2, 2);
  const auto det = detect_serial_structure(gyr);
  bool gyr_ok = false;
  if (const auto* n = std::get_if<NotSerial>(&det)) {
    auto c = n->cycle;
    std::sort(c.begin(), c.end());
    gyr_ok = c == std::vector<std::size_t>{0, 1};
  }
  return {chain_ok && gyr_ok, std::string("chain identity ordering ") + (chain_ok ? "yes" : "no") +
                                  ", gyrator 2-cycle witness " + (gyr_ok ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::function<Outcome()>, double>> criteria = {
      {criterion1, 120}, {criterion2, 30}, {criterion3, 10}, {criterion4, 120},
      {criterion5, 60},  {criterion6, 60}, {criterion7, 180}, {criterion8, 1}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].first();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < criteria[i].second;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %zu: %s  %s  [%.2f s, limit %.0f s]\n", i + 1, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                criteria[i].second);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
