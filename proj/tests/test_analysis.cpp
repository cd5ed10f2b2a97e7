// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "support.hpp"

using namespace phnet;
using namespace phnet::testing;

namespace {

double nearest(const std::vector<Scalar>& ev, Scalar z) {
  double best = std::numeric_limits<double>::infinity();
  for (auto e : ev) best = std::min(best, std::abs(e - z));
  return best;
}

}  // namespace

TEST(Spectrum, FreeWave) {
  const auto sp = spectrum(assemble_generator(build_free_wave(), 48));
  const auto ev = sp.resolved_eigenvalues();
  for (int k = -6; k <= 6; ++k) EXPECT_LT(nearest(ev, Scalar(0, std::numbers::pi * k)), 1e-8) << k;
  EXPECT_EQ(sp.zero_modes.size(), 1u);
  // the discrete kernel also holds a grid mode (top Legendre degree); it must be split off
  std::size_t kernel = 0, smooth = 0;
  for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i)
    if (std::abs(sp.eigenvalues[i]) < sp.zero_tol) {
      ++kernel;
      if (sp.tail[i] < 1e-12) ++smooth;
    }
  EXPECT_EQ(kernel, 2u);
  EXPECT_EQ(smooth, 1u);
  EXPECT_LT(std::abs(sp.abscissa), 1e-8);
  EXPECT_EQ(asymptotic_verdict(sp), "not asymptotically stable (imaginary spectrum)");
}

TEST(Spectrum, DampedWaveCharacteristicEquation) {
  for (double kappa : {0.25, 0.5, 2.0}) {
    const auto sp = spectrum(assemble_generator(build_damped_wave(kappa), 48));
    // e^{2 lambda} = (1 - kappa) / (1 + kappa)
    const Scalar r = std::log(Scalar((1.0 - kappa) / (1.0 + kappa))) / 2.0;
    for (int k = -3; k <= 3; ++k) EXPECT_LT(nearest(sp.resolved_eigenvalues(), r + Scalar(0, std::numbers::pi * k)), 1e-7);
    EXPECT_NEAR(sp.abscissa, r.real(), 1e-7);
    EXPECT_EQ(asymptotic_verdict(sp), "asymptotically stable");
  }
}

TEST(Spectrum, PinnedBeam) {
  EulerBernoulliSpec spec;
  spec.left_pinned = true;
  const auto sp = spectrum(assemble_generator(build_beam(spec), 48));
  for (int k = 1; k <= 4; ++k) {
    const double w = std::pow(k * std::numbers::pi, 2);
    EXPECT_LT(nearest(sp.resolved_eigenvalues(), Scalar(0, w)), 1e-6 * w);
  }
  EXPECT_TRUE(sp.zero_modes.empty());
}

TEST(Spectrum, ConjugateSymmetry) {
  for (const auto& info : scenario_registry()) {
    const auto sp = spectrum(assemble_generator(info.build(), 32));
    EXPECT_LT(conjugate_mismatch(sp.eigenvalues), 1e-12) << info.name;
  }
}

TEST(Spectrum, TailSeparatesResolvedModes) {
  const auto sp = spectrum(assemble_generator(build_free_wave(), 48));
  std::size_t resolved = 0;
  for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) {
    EXPECT_EQ(sp.resolved[i], sp.tail[i] <= kResolvedTailMax);
    if (sp.resolved[i]) ++resolved;
  }
  EXPECT_GT(resolved, 20u);
  EXPECT_LT(resolved, sp.eigenvalues.size());
  EXPECT_GE(sp.discrete_abscissa, sp.abscissa);
}

TEST(Resolvent, LowerBoundByEigenvalueDistance) {
  const auto g = assemble_generator(build_damped_wave(0.5), 32);
  const auto sp = spectrum(g);
  ResolventOptions opt;
  opt.samples = 60;
  const auto scan = resolvent_scan(g, sp, opt);
  ASSERT_FALSE(scan.betas.empty());
  const auto ev = sp.resolved_eigenvalues();
  for (std::size_t i = 0; i < scan.betas.size(); ++i) {
    const double dist = nearest(ev, Scalar(0, scan.betas[i]));
    EXPECT_GE(scan.norms[i] * (1.0 + 1e-9), 1.0 / dist) << scan.betas[i];
  }
  EXPECT_LE(scan.trend, kTrendMax);
  EXPECT_EQ(exponential_verdict(sp, scan), "exponentially stable (surrogate)");
}

TEST(Resolvent, NormalOperatorEqualsInverseDistance) {
  // the free string generator is skew-adjoint, so |R(i beta)| = 1 / dist
  const auto g = assemble_generator(build_free_wave(), 32);
  const auto sp = spectrum(g);
  ResolventOptions opt;
  opt.samples = 40;
  opt.beta_max = 20.0;
  opt.refine_levels = 0;
  const auto scan = resolvent_scan(g, sp, opt);
  for (std::size_t i = 0; i < scan.betas.size(); ++i) {
    const double dist = nearest(sp.resolved_eigenvalues(), Scalar(0, scan.betas[i]));
    if (dist < 1e-6) continue;
    EXPECT_NEAR(scan.norms[i] * dist, 1.0, 1e-6);
  }
  EXPECT_EQ(exponential_verdict(sp, scan), "not asymptotically stable (imaginary spectrum)");
}

TEST(Resolvent, SlowDecayIsFlagged) {
  const auto g = assemble_generator(build_tip_mass_string(), 48);
  const auto sp = spectrum(g);
  EXPECT_LT(sp.abscissa, 0.0);
  const auto scan = resolvent_scan(g, sp);
  EXPECT_GT(scan.trend, kTrendMax);
  EXPECT_EQ(exponential_verdict(sp, scan), "exponential stability NOT indicated");
}

TEST(Asp, InvisibleAndVisibleModes) {
  using namespace detail;
  const auto g = assemble_generator(build_free_wave(), 32);
  const auto sp = spectrum(g);
  // sigma(0) vanishes on every free-free mode
  const auto blind = asp_diagnostic(g, sp, {{0, kS0}});
  ASSERT_FALSE(blind.empty());
  for (const auto& e : blind) EXPECT_LT(e.residual, 1e-8);
  // v(0) sees all of them
  const auto seen = asp_diagnostic(g, sp, {{0, kV0}});
  ASSERT_EQ(seen.size(), blind.size());
  for (const auto& e : seen) EXPECT_GT(e.residual, 1e-2) << e.lambda;
  EXPECT_THROW(asp_diagnostic(g, sp, {{1, 0}}), StructuralError);
  EXPECT_THROW(asp_diagnostic(g, sp, {{0, 9}}), StructuralError);
}

TEST(Asp, DampedHasNoCandidates) {
  const auto g = assemble_generator(build_damped_wave(), 32);
  EXPECT_TRUE(asp_diagnostic(g, spectrum(g), {{0, detail::kV0}}).empty());
}

TEST(DecayFit, SyntheticExponential) {
  std::vector<double> t, e;
  for (int k = 0; k <= 400; ++k) {
    t.push_back(0.05 * k);
    e.push_back(3.0 * std::exp(-0.4 * t.back()) * (1.0 + 0.1 * std::cos(5.0 * t.back())));
  }
  const auto f = decay_fit(t, e);
  EXPECT_NEAR(f.eta, -0.4, 0.01);
  EXPECT_GE(f.m, 1.0);
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_LE(e[k], f.m * std::exp(f.eta * t[k]) * e[0] * (1 + 1e-12));

  std::vector<double> pure;
  for (double s : t) pure.push_back(std::exp(-0.7 * s));
  EXPECT_NEAR(decay_fit(t, pure).eta, -0.7, 1e-10);
  EXPECT_NEAR(decay_fit(t, pure).m, 1.0, 1e-10);

  EXPECT_THROW(decay_fit({0.0, 1.0}, {1.0, 0.5}), StructuralError);
  pure[10] = 0.0;
  EXPECT_THROW(decay_fit(t, pure), NumericalError);
}
