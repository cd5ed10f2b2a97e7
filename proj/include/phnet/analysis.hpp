// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "phnet/discretize.hpp"
#include "phnet/linalg.hpp"
#include "phnet/simulate.hpp"

namespace phnet {

/// Eigenvalues of the generator in the energy inner product (sorted by
/// descending real part). A mode is "resolved" when in every subsystem its
/// eigenfunction keeps at most kResolvedTailMax of its Legendre energy in the
/// top third of the degrees; the remaining modes are grid artefacts whose eigenvalues do not
/// converge. `abscissa` is taken over resolved modes, `discrete_abscissa` over
/// all of them.
struct SpectrumReport {
  std::vector<Scalar> eigenvalues;
  Matrix vectors;  // sim-frame eigenvectors, unit norm, columns match eigenvalues
  std::vector<double> tail;
  std::vector<bool> resolved;
  std::vector<std::size_t> zero_modes;  // resolved modes with |lambda| < zero_tol
  double abscissa = -std::numeric_limits<double>::infinity();
  double discrete_abscissa = -std::numeric_limits<double>::infinity();
  double numerical_range_max = 0.0;
  double zero_tol = 0.0;

  std::vector<Scalar> resolved_eigenvalues() const {
    std::vector<Scalar> out;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i)
      if (resolved[i]) out.push_back(eigenvalues[i]);
    return out;
  }
};

inline constexpr double kResolvedTailMax = 1e-3;

namespace detail {

/// Legendre coefficients of the nodal values of H x, scaled so that their
/// squared moduli add up to the subsystem energies. Degrees >= ceil(2n/3) are
/// marked as tail.
struct LegendreEnergy {
  Vector coef;
  std::vector<std::size_t> part;
  std::vector<char> high;
};

inline LegendreEnergy legendre_energy(const DiscreteGenerator& g, const Vector& x) {
  LegendreEnergy out;
  Index size = 0;
  for (const auto& part : g.parts) size += part.l.rows();
  out.coef.resize(size);
  Index at = 0;
  for (std::size_t j = 0; j < g.parts.size(); ++j) {
    const auto& part = g.parts[j];
    const auto& grid = part.grid;
    const int n = grid.n;
    const Index d = part.l.rows() / n;
    const Vector y = part.h_block * x.segment(g.state_offset[j], part.l.rows());
    const int cut = (2 * n + 2) / 3;
    for (Index c = 0; c < d; ++c) {
      // 2 * weights are the quadrature weights on [-1, 1].
      const Vector proj = grid.legendre.cast<Scalar>() * (2.0 * grid.weights.cast<Scalar>()).cwiseProduct(y.segment(c * n, n));
      for (int k = 0; k < n; ++k) {
        out.coef(at++) = proj(k) / std::sqrt(grid.gamma(k));
        out.part.push_back(j);
        out.high.push_back(k >= cut);
      }
    }
  }
  return out;
}

}  // namespace detail

/// Largest fraction of energy carried by Legendre degrees >= ceil(2n/3) in
/// the nodal values of H x, taken over the subsystems that hold more than
/// 1e-8 of the subsystem energy of the full-coordinate vector x.
inline double spectral_tail(const DiscreteGenerator& g, const Vector& x) {
  const auto le = detail::legendre_energy(g, x);
  std::vector<double> total(g.parts.size(), 0.0), tail(g.parts.size(), 0.0);
  double sum = 0.0;
  for (Index i = 0; i < le.coef.size(); ++i) {
    const double e = std::norm(le.coef(i));
    total[le.part[static_cast<std::size_t>(i)]] += e;
    if (le.high[static_cast<std::size_t>(i)]) tail[le.part[static_cast<std::size_t>(i)]] += e;
    sum += e;
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < total.size(); ++j)
    if (total[j] > 1e-8 * sum) worst = std::max(worst, tail[j] / total[j]);
  return worst;
}

namespace detail {

/// Within a cluster of coincident semisimple eigenvalues the solver returns an
/// arbitrary basis, which can mix a smooth mode with a grid mode (the free
/// string has both at 0). Rotate the basis to diagonalize the tail energy
/// against the total energy, so each vector is either smooth or not.
inline void separate_clusters(const DiscreteGenerator& g, const Vector& values, Matrix& vecs, double tol) {
  const Index r = values.size();
  std::vector<char> seen(static_cast<std::size_t>(r), 0);
  for (Index i = 0; i < r; ++i) {
    if (seen[static_cast<std::size_t>(i)]) continue;
    std::vector<Index> cl{i};
    for (Index j = i + 1; j < r; ++j)
      if (!seen[static_cast<std::size_t>(j)] && std::abs(values(j) - values(i)) < tol) cl.push_back(j);
    for (Index j : cl) seen[static_cast<std::size_t>(j)] = 1;
    const Index k = static_cast<Index>(cl.size());
    if (k < 2) continue;
    Matrix v(r, k);
    for (Index c = 0; c < k; ++c) v.col(c) = vecs.col(cl[static_cast<std::size_t>(c)]).normalized();
    Eigen::ColPivHouseholderQR<Matrix> qr(v);
    qr.setThreshold(1e-6);
    if (qr.rank() < k) continue;  // defective: keep the solver's vectors
    const Matrix q = qr.householderQ() * Matrix::Identity(r, k);
    Matrix all(0, k), high(0, k);
    for (Index c = 0; c < k; ++c) {
      const auto le = legendre_energy(g, g.full_from_sim(q.col(c)));
      if (c == 0) {
        all.resize(le.coef.size(), k);
        high = Matrix::Zero(le.coef.size(), k);
      }
      all.col(c) = le.coef;
      for (Index m = 0; m < le.coef.size(); ++m)
        if (le.high[static_cast<std::size_t>(m)]) high(m, c) = le.coef(m);
    }
    const Matrix e = all.adjoint() * all, t = high.adjoint() * high;
    if (linalg::min_eigen(e).value <= 1e-12 * e.norm()) continue;  // cluster lives on controller states
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(t, e);
    if (ges.info() != Eigen::Success) continue;
    const Matrix rot = q * ges.eigenvectors();
    for (Index c = 0; c < k; ++c) vecs.col(cl[static_cast<std::size_t>(c)]) = rot.col(c).normalized();
  }
}

}  // namespace detail

inline SpectrumReport spectrum(const DiscreteGenerator& g) {
  SpectrumReport rep;
  const Index r = g.a_sim.rows();
  Vector values(r);
  Matrix vecs(r, r);
  if (linalg::is_real(g.a_sim)) {
    Eigen::EigenSolver<RealMatrix> es(g.a_sim.real());
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue iteration failed");
    values = es.eigenvalues();
    vecs = es.eigenvectors();
  } else {
    Eigen::ComplexEigenSolver<Matrix> es(g.a_sim);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue iteration failed");
    values = es.eigenvalues();
    vecs = es.eigenvectors();
  }
  detail::separate_clusters(g, values, vecs, 1e-8 * linalg::spectral_norm(g.a_sim));
  std::vector<Index> idx(static_cast<std::size_t>(r));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    if (values(a).real() != values(b).real()) return values(a).real() > values(b).real();
    return values(a).imag() > values(b).imag();
  });

  rep.vectors.resize(r, r);
  rep.zero_tol = 1e-8 * linalg::spectral_norm(g.a_sim);
  rep.numerical_range_max = g.numerical_range_max;
  for (Index k = 0; k < r; ++k) {
    const Index i = idx[static_cast<std::size_t>(k)];
    rep.eigenvalues.push_back(values(i));
    rep.vectors.col(k) = vecs.col(i).normalized();
    const double t = spectral_tail(g, g.full_from_sim(rep.vectors.col(k)));
    rep.tail.push_back(t);
    rep.resolved.push_back(t <= kResolvedTailMax);
    rep.discrete_abscissa = std::max(rep.discrete_abscissa, values(i).real());
    if (rep.resolved.back()) rep.abscissa = std::max(rep.abscissa, values(i).real());
    if (rep.resolved.back() && std::abs(values(i)) < rep.zero_tol) rep.zero_modes.push_back(static_cast<std::size_t>(k));
  }
  return rep;
}

/// Largest |lambda - conj(mu)| over a greedy conjugate pairing.
inline double conjugate_mismatch(const std::vector<Scalar>& ev) {
  std::vector<char> used(ev.size(), 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ev.size(); ++j) best = std::min(best, std::abs(ev[i] - std::conj(ev[j])));
    worst = std::max(worst, best);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Resolvent scan

struct ResolventScan {
  std::vector<double> betas;
  std::vector<double> norms;
  std::vector<bool> diverged;
  double beta_max = 0.0;
  double sup_norm = 0.0;
  double trend = std::numeric_limits<double>::quiet_NaN();
  Index dimension = 0;  // size of the operator actually scanned
};

struct ResolventOptions {
  double beta_max = 0.0;  // <= 0 selects the default range
  int samples = 400;
  bool resolved_only = true;
  int refine_levels = 3;
};

inline int thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PHNET_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) hw = std::min(hw, static_cast<unsigned>(cap));
  }
  return static_cast<int>(hw);
}

/// Default scan range: 8 times the largest |Im| among the 20 dominant resolved
/// modes, capped by the largest resolved frequency.
inline double default_beta_max(const SpectrumReport& sp) {
  const auto ev = sp.resolved_eigenvalues();
  double dom = 0.0, all = 0.0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (i < 20) dom = std::max(dom, std::abs(ev[i].imag()));
    all = std::max(all, std::abs(ev[i].imag()));
  }
  const double b = std::min(8.0 * dom, all);
  return b > 0 ? b : 1.0;
}

/// norm(beta) = |(i beta - A)^{-1}| in the energy norm, i.e. 1 / sigma_min in
/// the sim frame. With `resolved_only` the operator is compressed to the span
/// of the resolved eigenvectors.
inline ResolventScan resolvent_scan(const DiscreteGenerator& g, const SpectrumReport& sp,
                                    const ResolventOptions& opt = {}) {
  ResolventScan out;
  Matrix op;
  std::vector<Scalar> ev;
  if (opt.resolved_only) {
    std::vector<Index> cols;
    for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i)
      if (sp.resolved[i]) cols.push_back(static_cast<Index>(i));
    Matrix v(g.a_sim.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) v.col(static_cast<Index>(c)) = sp.vectors.col(cols[c]);
    Eigen::HouseholderQR<Matrix> qr(v);
    const Matrix q = qr.householderQ() * Matrix::Identity(v.rows(), v.cols());
    op = q.adjoint() * g.a_sim * q;
    ev = sp.resolved_eigenvalues();
  } else {
    op = g.a_sim;
    ev = sp.eigenvalues;
  }
  out.dimension = op.rows();
  out.beta_max = opt.beta_max > 0 ? opt.beta_max : default_beta_max(sp);
  const int samples = std::max(opt.samples, 4);

  std::vector<double> betas;
  const double h = out.beta_max / (samples - 1);
  for (int i = 0; i < samples; ++i) betas.push_back(h * i);
  for (const auto& l : ev) {
    const double w = std::abs(l.imag());
    if (w > out.beta_max) continue;
    betas.push_back(w);
    for (int lvl = 1; lvl <= opt.refine_levels; ++lvl) {
      const double off = h * std::pow(10.0, -lvl);
      if (w - off >= 0) betas.push_back(w - off);
      if (w + off <= out.beta_max) betas.push_back(w + off);
    }
  }
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());

  const std::size_t m = betas.size();
  std::vector<double> norms(m, 0.0);
  const Index dim = op.rows();
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < m; i += step) {
      if (dim == 0) {
        norms[i] = 0.0;
        continue;
      }
      Matrix shifted = -op;
      shifted.diagonal().array() += Scalar(0.0, betas[i]);
      const RealVector s = linalg::singular_values(shifted);
      const double smin = s(s.size() - 1);
      norms[i] = smin > 0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
    }
  };
  const int nt = std::min<int>(thread_count(), static_cast<int>(m));
  if (nt <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work, static_cast<std::size_t>(t), static_cast<std::size_t>(nt));
    for (auto& th : pool) th.join();
  }

  const double scale = std::max(1.0, linalg::spectral_norm(op));
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& l : ev) dist = std::min(dist, std::abs(Scalar(0.0, betas[i]) - l));
    const bool div = !std::isfinite(norms[i]) || dist <= 1e-8 * scale || norms[i] * 1e-12 > 1.0 / scale;
    out.betas.push_back(betas[i]);
    out.norms.push_back(norms[i]);
    out.diverged.push_back(div);
    if (div) continue;
    out.sup_norm = std::max(out.sup_norm, norms[i]);
    if (betas[i] >= 0.5 * out.beta_max)
      hi = std::max(hi, norms[i]);
    else
      lo = std::max(lo, norms[i]);
  }
  if (lo > 0) out.trend = hi / lo;
  return out;
}

// ---------------------------------------------------------------------------
// Verdicts

inline constexpr double kAbscissaTol = 1e-6;
inline constexpr double kTrendMax = 1.5;

inline std::string asymptotic_verdict(const SpectrumReport& sp) {
  if (sp.abscissa < -kAbscissaTol) return "asymptotically stable";
  if (sp.abscissa <= kAbscissaTol) return "not asymptotically stable (imaginary spectrum)";
  return "unstable";
}

/// Surrogate only: a fixed-n matrix always has a bounded resolvent, so a
/// growing trend over the scanned band is read as loss of uniform bounds.
inline std::string exponential_verdict(const SpectrumReport& sp, const ResolventScan& scan) {
  if (!(sp.abscissa < -kAbscissaTol)) return asymptotic_verdict(sp);
  if (std::isfinite(scan.trend) && scan.trend <= kTrendMax) return "exponentially stable (surrogate)";
  return "exponential stability NOT indicated";
}

// ---------------------------------------------------------------------------
// ASP diagnostic

/// A trace component tau^j_i of subsystem j observed by R.
struct TraceSelector {
  std::size_t subsystem = 0;
  Index component = 0;
};

struct AspEntry {
  Scalar lambda;
  std::size_t multiplicity = 1;
  double residual = 0.0;  // min |R v| over unit-energy v in the eigenspace
};

/// For every cluster of resolved eigenvalues with |Re| < tol, reports the
/// smallest observation |R v| over the (energy-normalised) eigenspace. A
/// residual near 0 marks an undamped mode invisible to R.
inline std::vector<AspEntry> asp_diagnostic(const DiscreteGenerator& g, const SpectrumReport& sp,
                                            const std::vector<TraceSelector>& selector, double tol = 1e-6) {
  Matrix rows(static_cast<Index>(selector.size()), g.full_size);
  rows.setZero();
  for (std::size_t i = 0; i < selector.size(); ++i) {
    const auto& sel = selector[i];
    if (sel.subsystem >= g.parts.size()) throw StructuralError("selector names a nonexistent subsystem");
    const auto& t = g.parts[sel.subsystem].t;
    if (sel.component < 0 || sel.component >= t.rows()) throw StructuralError("selector component out of range");
    rows.block(static_cast<Index>(i), g.state_offset[sel.subsystem], 1, t.cols()) = t.row(sel.component);
  }
  const Matrix obs = rows * g.lift * g.chol_r_inv;

  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i)
    if (sp.resolved[i] && std::abs(sp.eigenvalues[i].real()) < tol) cand.push_back(i);
  std::sort(cand.begin(), cand.end(), [&](auto a, auto b) { return sp.eigenvalues[a].imag() < sp.eigenvalues[b].imag(); });

  std::vector<AspEntry> out;
  const double ctol = 1e-6 * std::max(1.0, linalg::spectral_norm(g.a_sim));
  for (std::size_t i = 0; i < cand.size();) {
    std::size_t j = i + 1;
    while (j < cand.size() && std::abs(sp.eigenvalues[cand[j]] - sp.eigenvalues[cand[i]]) < ctol) ++j;
    Matrix v(sp.vectors.rows(), static_cast<Index>(j - i));
    for (std::size_t k = i; k < j; ++k) v.col(static_cast<Index>(k - i)) = sp.vectors.col(cand[k]);
    Eigen::HouseholderQR<Matrix> qr(v);
    const Matrix q = qr.householderQ() * Matrix::Identity(v.rows(), v.cols());
    const Matrix rv = obs * q;
    double residual = 0.0;
    if (rv.rows() >= rv.cols()) {
      const RealVector s = linalg::singular_values(rv);
      residual = s.size() ? s(s.size() - 1) : 0.0;
    }
    out.push_back({sp.eigenvalues[cand[i]], j - i, residual});
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decay fit

struct DecayFit {
  double m = 1.0;
  double eta = 0.0;
};

/// Least-squares line through log H(t) on [t_end / 4, t_end]; eta is the
/// slope and M the smallest constant >= 1 with H(t) <= M e^{eta t} H(0) on
/// every sample.
inline DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& energies) {
  if (times.size() != energies.size() || times.size() < 32)
    throw StructuralError("decay fit needs at least 32 samples");
  for (double e : energies)
    if (!(e > 0)) throw NumericalError("energy trace has a non-positive sample");
  const double t_end = times.back();
  double s0 = 0, s1 = 0, s2 = 0, sy = 0, sty = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.25 * t_end) continue;
    const double t = times[k], ly = std::log(energies[k]);
    s0 += 1;
    s1 += t;
    s2 += t * t;
    sy += ly;
    sty += t * ly;
  }
  DecayFit f;
  const double det = s0 * s2 - s1 * s1;
  f.eta = det > 0 ? (s0 * sty - s1 * sy) / det : 0.0;
  for (std::size_t k = 0; k < times.size(); ++k)
    f.m = std::max(f.m, energies[k] / (energies.front() * std::exp(f.eta * times[k])));
  return f;
}

inline DecayFit decay_fit(const EnergyTrace& tr) { return decay_fit(tr.times, tr.energies); }

}  // namespace phnet
