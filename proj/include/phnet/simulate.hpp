// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "phnet/discretize.hpp"

namespace phnet {

/// Implicit midpoint for y' = a_sim y:  y+ = (I - dt/2 A)^{-1} (I + dt/2 A) y,
/// evaluated as w = (I - dt/2 A)^{-1} y, y+ = 2 w - y with one factorization.
class CayleyStepper {
 public:
  CayleyStepper(const Matrix& a, double dt) : dt_(dt) {
    Matrix lhs = -0.5 * dt * a;
    lhs.diagonal().array() += 1.0;
    lu_.compute(lhs);
    const double rc = lu_.rcond();
    if (!(rc > 1e-14))
      throw NumericalError("implicit midpoint matrix is singular (dt = " + std::to_string(dt) +
                           ", reciprocal condition " + std::to_string(rc) + ")");
  }

  Vector step(const Vector& y) const { return 2.0 * lu_.solve(y) - y; }
  double dt() const { return dt_; }

 private:
  double dt_;
  Eigen::PartialPivLU<Matrix> lu_;
};

/// One Cayley step of the sim-frame state y. Negative dt steps backwards.
inline Vector step_midpoint(const DiscreteGenerator& g, const Vector& y, double dt) {
  return CayleyStepper(g.a_sim, dt).step(y);
}

/// Trajectory record. Energies are 1/2 |y|^2 in the sim frame, which equals
/// 1/2 <x, x>_H summed over subsystems plus the controller energy. `traces[k]`
/// stacks tau(H x) of every subsystem in physical units.
struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<Vector> traces;
  std::vector<Index> trace_offset;  // per subsystem
  std::vector<Index> trace_size;
  std::vector<Vector> states;       // full coordinates, every `snapshot_every` steps
  int snapshot_every = 0;
  double projection_residual = 0.0;
  std::string warning;
};

struct SimulateOptions {
  int snapshot_every = 0;  // 0 disables snapshots
  bool record_traces = true;
};

/// Maps the stacked unit-interval traces to physical ones.
inline Matrix physical_trace_map(const Network& net) {
  std::vector<Matrix> blocks;
  for (const auto& s : net.subsystems) blocks.push_back(s.trace_scaling() / s.length());
  return linalg::block_diag(blocks);
}

inline constexpr double kIncompatibleResidual = 1e-6;

/// Projects x0 (full coordinates) onto the constraint kernel in the energy
/// inner product and integrates ceil(t_end / dt) steps.
inline EnergyTrace simulate(const DiscreteGenerator& g, const Network& net, const Vector& x0, double dt, double t_end,
                            const SimulateOptions& opt = {}) {
  if (!(dt > 0)) throw StructuralError("dt must be positive");
  if (!(t_end >= 0)) throw StructuralError("t_end must be non-negative");
  if (x0.size() != g.full_size) throw StructuralError("initial state has wrong size");
  EnergyTrace tr;
  Vector y = g.sim_from_full(x0);
  const Vector back = g.full_from_sim(y);
  const double x0n = std::sqrt(std::max(0.0, x0.dot(g.m_full * x0).real()));
  const Vector diff = x0 - back;
  const double dn = std::sqrt(std::max(0.0, diff.dot(g.m_full * diff).real()));
  tr.projection_residual = x0n > 0 ? dn / x0n : 0.0;
  if (tr.projection_residual > kIncompatibleResidual)
    tr.warning = "incompatible initial datum: projection residual " + std::to_string(tr.projection_residual);

  Index off = 0;
  for (const auto& s : net.subsystems) {
    tr.trace_offset.push_back(off);
    tr.trace_size.push_back(s.trace_size());
    off += s.trace_size();
  }
  const Matrix trace_map = physical_trace_map(net) * g.t_full * g.lift.topRows(g.controller_offset) * g.chol_r_inv;
  tr.snapshot_every = opt.snapshot_every;

  const CayleyStepper stepper(g.a_sim, dt);
  const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  auto record = [&](long k, const Vector& state) {
    tr.times.push_back(static_cast<double>(k) * dt);
    tr.energies.push_back(0.5 * state.squaredNorm());
    if (opt.record_traces) tr.traces.push_back(trace_map * state);
    if (opt.snapshot_every > 0 && k % opt.snapshot_every == 0) tr.states.push_back(g.full_from_sim(state));
  };
  record(0, y);
  for (long k = 1; k <= steps; ++k) {
    y = stepper.step(y);
    record(k, y);
  }
  return tr;
}

/// Default step: min(1e-2, 0.5 / max |Im| over the 10 dominant modes).
inline double default_dt(const std::vector<Scalar>& dominant_first) {
  double w = 0.0;
  for (std::size_t i = 0; i < dominant_first.size() && i < 10; ++i) w = std::max(w, std::abs(dominant_first[i].imag()));
  return w > 0 ? std::min(1e-2, 0.5 / w) : 1e-2;
}

// ---------------------------------------------------------------------------
// Initial data

/// Builds a full-coordinate initial state from a preset name:
///   "sine"         first component sin(pi s) on every subsystem
///   "bump"         first component exp(-((s - 1/2) / 0.15)^2)
///   "random:SEED"  smooth random trigonometric data in every component,
///                  windowed by sin^2(pi s) so that values and first
///                  derivatives vanish at both ends, and random controller states
inline Vector initial_state(const DiscreteGenerator& g, const std::string& preset, unsigned long long default_seed = 0) {
  Vector x = Vector::Zero(g.full_size);
  std::string kind = preset;
  unsigned long long seed = default_seed;
  if (const auto colon = preset.find(':'); colon != std::string::npos) {
    kind = preset.substr(0, colon);
    try {
      seed = std::stoull(preset.substr(colon + 1));
    } catch (const std::exception&) {
      throw StructuralError("bad seed in initial-state preset '" + preset + "'");
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t j = 0; j < g.parts.size(); ++j) {
    const auto& grid = g.parts[j].grid;
    const int n = grid.n;
    const Index d = g.parts[j].l.rows() / n;
    auto seg = x.segment(g.state_offset[j], Index{n} * d);
    if (kind == "sine") {
      for (int i = 0; i < n; ++i) seg(i) = std::sin(std::numbers::pi * grid.points(i));
    } else if (kind == "bump") {
      for (int i = 0; i < n; ++i) seg(i) = std::exp(-std::pow((grid.points(i) - 0.5) / 0.15, 2));
    } else if (kind == "random") {
      for (Index c = 0; c < d; ++c) {
        double a[5], b[5];
        for (int k = 0; k < 5; ++k) {
          a[k] = normal(rng) / (1.0 + k);
          b[k] = normal(rng) / (1.0 + k);
        }
        for (int i = 0; i < n; ++i) {
          const double s = grid.points(i);
          double v = 0.0;
          for (int k = 0; k < 5; ++k)
            v += a[k] * std::cos(k * std::numbers::pi * s) + b[k] * std::sin((k + 1) * std::numbers::pi * s);
          seg(c * n + i) = v * std::pow(std::sin(std::numbers::pi * s), 2);
        }
      }
    } else {
      throw StructuralError("unknown initial-state preset '" + preset + "' (expected sine, bump or random:SEED)");
    }
  }
  if (kind == "random")
    for (Index i = g.controller_offset; i < g.full_size; ++i) x(i) = normal(rng);
  return x;
}

}  // namespace phnet
