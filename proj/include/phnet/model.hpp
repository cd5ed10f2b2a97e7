// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "phnet/linalg.hpp"
#include "phnet/types.hpp"

namespace phnet {

/// Matrix-valued coefficient on a physical interval [lo, hi]: a constant, a
/// polynomial sum_i c_i * zeta^i in the physical coordinate, or piecewise-linear
/// samples on a uniform grid covering [lo, hi]. Used for H and for P_0.
class MatrixFunction {
 public:
  enum class Kind { Constant, Polynomial, Sampled };

  MatrixFunction() = default;

  static MatrixFunction constant(Matrix value) {
    MatrixFunction f;
    f.kind_ = Kind::Constant;
    f.data_ = {std::move(value)};
    return f;
  }

  static MatrixFunction polynomial(std::vector<Matrix> coefficients) {
    if (coefficients.empty()) throw StructuralError("polynomial coefficient list is empty");
    MatrixFunction f;
    f.kind_ = Kind::Polynomial;
    f.data_ = std::move(coefficients);
    f.check_shapes();
    return f;
  }

  static MatrixFunction sampled(std::vector<Matrix> samples) {
    if (samples.size() < 2) throw StructuralError("sampled representation needs at least 2 samples");
    MatrixFunction f;
    f.kind_ = Kind::Sampled;
    f.data_ = std::move(samples);
    f.check_shapes();
    return f;
  }

  static MatrixFunction zero(Index dim) { return constant(Matrix::Zero(dim, dim)); }

  Kind kind() const { return kind_; }
  const std::vector<Matrix>& data() const { return data_; }
  Index rows() const { return data_.empty() ? 0 : data_.front().rows(); }
  Index cols() const { return data_.empty() ? 0 : data_.front().cols(); }
  bool empty() const { return data_.empty(); }

  /// Value at the physical point zeta of the interval [lo, hi].
  Matrix at(double zeta, double lo = 0.0, double hi = 1.0) const {
    switch (kind_) {
      case Kind::Constant:
        return data_.front();
      case Kind::Polynomial: {
        Matrix acc = data_.back();
        for (auto it = data_.rbegin() + 1; it != data_.rend(); ++it) acc = (acc * zeta + *it).eval();
        return acc;
      }
      case Kind::Sampled: {
        const double s = std::clamp((zeta - lo) / (hi - lo), 0.0, 1.0);
        const double pos = s * static_cast<double>(data_.size() - 1);
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), data_.size() - 2);
        const double t = pos - static_cast<double>(i);
        return (1.0 - t) * data_[i] + t * data_[i + 1];
      }
    }
    return {};
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& d : data_) m = std::max(m, linalg::max_abs(d));
    return m;
  }

 private:
  void check_shapes() const {
    for (const auto& d : data_)
      if (d.rows() != data_.front().rows() || d.cols() != data_.front().cols())
        throw StructuralError("matrix function entries have inconsistent shapes");
  }

  Kind kind_ = Kind::Constant;
  std::vector<Matrix> data_;
};

/// One open-loop port-Hamiltonian subsystem of order N on a physical interval.
///
/// The stored data is physical. The accessors prefixed `unit_` return the
/// equivalent description on (0, 1): with l = b - a,
///   P_k -> l^{-k-1} P_k,  P_0 -> P_0 / l,  H -> l H,  W -> W S / l,
/// where S rescales trace entries of derivative order i by l^{-i}. This keeps
/// the state values, the energy, the port values and the power balance
/// identical to the physical system.
struct PHSubsystem {
  std::string name;
  int order = 1;
  int dim = 1;
  std::vector<Matrix> principal;  // P_1 .. P_N
  MatrixFunction p0;              // may be empty, meaning P_0 = 0
  MatrixFunction hamiltonian;
  Matrix w_b;  // input rows
  Matrix w_c;  // output rows
  double a = 0.0;
  double b = 1.0;

  Index trace_size() const { return 2 * Index{order} * dim; }
  Index port_size() const { return Index{order} * dim; }
  Index input_size() const { return w_b.rows(); }
  Index output_size() const { return w_c.rows(); }
  double length() const { return b - a; }
  bool has_square_ports() const { return w_b.rows() == port_size() && w_c.rows() == port_size(); }

  const Matrix& P(int k) const { return principal.at(static_cast<std::size_t>(k - 1)); }

  Matrix unit_P(int k) const { return std::pow(length(), -(k + 1)) * P(k); }

  Matrix hamiltonian_at_unit(double s) const { return hamiltonian.at(a + length() * s, a, b); }
  Matrix unit_hamiltonian_at(double s) const { return length() * hamiltonian_at_unit(s); }

  Matrix p0_at_unit(double s) const {
    if (p0.empty()) return Matrix::Zero(dim, dim);
    return p0.at(a + length() * s, a, b);
  }
  Matrix unit_p0_at(double s) const { return p0_at_unit(s) / length(); }

  Matrix trace_scaling() const {
    Matrix sc = Matrix::Zero(trace_size(), trace_size());
    for (int end = 0; end < 2; ++end)
      for (int i = 0; i < order; ++i)
        for (int c = 0; c < dim; ++c) {
          const Index idx = (Index{end} * order + i) * dim + c;
          sc(idx, idx) = std::pow(length(), -i);
        }
    return sc;
  }
  Matrix unit_w_b() const { return w_b * trace_scaling() / length(); }
  Matrix unit_w_c() const { return w_c * trace_scaling() / length(); }

  bool is_real() const {
    auto real_fn = [](const MatrixFunction& f) {
      return std::all_of(f.data().begin(), f.data().end(), [](const Matrix& m) { return linalg::is_real(m); });
    };
    return std::all_of(principal.begin(), principal.end(), [](const Matrix& m) { return linalg::is_real(m); }) &&
           real_fn(p0) && real_fn(hamiltonian) && linalg::is_real(w_b) && linalg::is_real(w_c);
  }
};

/// Index of the derivative-`deriv` entry of component `comp` at `end`
/// (end 1 = right endpoint, end 0 = left endpoint) in the trace vector
/// (y(1), y'(1), ..., y^{(N-1)}(1), y(0), ..., y^{(N-1)}(0)).
inline Index trace_index(int order, int dim, int end, int deriv, int comp) {
  const int block = end == 1 ? 0 : 1;
  return (Index{block} * order + deriv) * dim + comp;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  double lipschitz = 0.0;  // finite-difference slope bound of H, reported only
  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.pass; });
  }
  const ValidationCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Throws StructuralError if declared (N, d) and the matrix shapes disagree.
inline void check_structure(const PHSubsystem& s) {
  auto fail = [&](const std::string& what) {
    throw StructuralError((s.name.empty() ? std::string("subsystem") : s.name) + ": " + what);
  };
  if (s.order < 1) fail("order must be positive");
  if (s.dim < 1) fail("dim must be positive");
  if (!(s.a < s.b)) fail("interval must satisfy a < b");
  if (static_cast<int>(s.principal.size()) != s.order)
    fail("expected " + std::to_string(s.order) + " principal matrices P_1..P_N");
  for (const auto& p : s.principal)
    if (p.rows() != s.dim || p.cols() != s.dim) fail("P_k must be d x d");
  if (!s.p0.empty() && (s.p0.rows() != s.dim || s.p0.cols() != s.dim)) fail("P_0 must be d x d");
  if (s.hamiltonian.empty()) fail("missing Hamiltonian density");
  if (s.hamiltonian.rows() != s.dim || s.hamiltonian.cols() != s.dim) fail("H must be d x d");
  const Index t = s.trace_size();
  if (s.w_b.cols() != t || s.w_c.cols() != t) fail("W_B and W_C must have 2Nd columns");
  if (s.w_b.rows() + s.w_c.rows() != t) fail("W_B and W_C must stack to a 2Nd x 2Nd matrix");
}

/// Unit-interval sample points used for pointwise tests on H and P_0.
inline std::vector<double> sample_grid(const std::vector<double>& extra = {}) {
  std::vector<double> g;
  g.reserve(256 + extra.size());
  for (int i = 0; i < 256; ++i) g.push_back(static_cast<double>(i) / 255.0);
  g.insert(g.end(), extra.begin(), extra.end());
  return g;
}

inline double lipschitz_estimate(const PHSubsystem& s) {
  const auto g = sample_grid();
  double slope = 0.0;
  Matrix prev = s.hamiltonian_at_unit(g[0]);
  for (std::size_t i = 1; i < g.size(); ++i) {
    Matrix cur = s.hamiltonian_at_unit(g[i]);
    const double dz = (g[i] - g[i - 1]) * s.length();
    slope = std::max(slope, linalg::spectral_norm(cur - prev) / dz);
    prev = std::move(cur);
  }
  return slope;
}

inline ValidationReport validate_subsystem(const PHSubsystem& s, const std::vector<double>& extra_grid = {}) {
  check_structure(s);
  ValidationReport rep;

  for (int k = 1; k <= s.order; ++k) {
    const Matrix& p = s.P(k);
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;  // P_k^* = (-1)^{k+1} P_k
    const double scale = linalg::max_abs(p);
    const double violation = linalg::max_abs(Matrix(p.adjoint() - sign * p));
    ValidationCheck c{"symmetry P_" + std::to_string(k), violation <= 1e-12 * scale, violation,
                      sign > 0 ? "P_k must be Hermitian" : "P_k must be skew-Hermitian"};
    rep.checks.push_back(c);
  }

  {
    const RealVector sv = linalg::singular_values(s.P(s.order));
    const double ratio = sv(0) > 0 ? sv(sv.size() - 1) / sv(0) : 0.0;
    rep.checks.push_back({"P_N invertible", ratio > kRelTol, ratio, "sigma_min / sigma_max"});
  }

  {
    Matrix stacked(s.trace_size(), s.trace_size());
    stacked << s.w_b, s.w_c;
    const RealVector sv = linalg::singular_values(stacked);
    const double ratio = sv(0) > 0 ? sv(sv.size() - 1) / sv(0) : 0.0;
    rep.checks.push_back({"[W_B; W_C] invertible", ratio > kRelTol, ratio, "sigma_min / sigma_max"});
  }

  double herm_violation = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  for (double z : sample_grid(extra_grid)) {
    const Matrix h = s.hamiltonian_at_unit(z);
    herm_violation = std::max(herm_violation, linalg::max_abs(Matrix(h - h.adjoint())) / std::max(1.0, linalg::max_abs(h)));
    min_eig = std::min(min_eig, linalg::min_eigen(h).value);
  }
  rep.checks.push_back({"H Hermitian", herm_violation <= 1e-12, herm_violation, "relative max |H - H^*|"});
  rep.checks.push_back({"H coercive", min_eig > 1e-8, min_eig, "min eigenvalue over the sample grid"});

  rep.lipschitz = lipschitz_estimate(s);
  return rep;
}

// ---------------------------------------------------------------------------
// Boundary trace

struct BoundaryTrace {
  int order = 1;
  int dim = 1;
  Vector values;  // length 2 N d

  Vector at(int end, int deriv) const { return values.segment(trace_index(order, dim, end, deriv, 0), dim); }
};

/// Endpoint values y^{(k)}(1) and y^{(k)}(0) for k = 0 .. N-1.
struct EndpointDerivatives {
  std::vector<Vector> right;
  std::vector<Vector> left;
};

inline BoundaryTrace trace(int order, int dim, const EndpointDerivatives& ep) {
  if (static_cast<int>(ep.right.size()) != order || static_cast<int>(ep.left.size()) != order)
    throw StructuralError("trace needs derivatives 0..N-1 at both endpoints");
  BoundaryTrace t{order, dim, Vector::Zero(2 * Index{order} * dim)};
  for (int k = 0; k < order; ++k) {
    if (ep.right[k].size() != dim || ep.left[k].size() != dim)
      throw StructuralError("endpoint derivative has wrong dimension");
    t.values.segment(trace_index(order, dim, 1, k, 0), dim) = ep.right[k];
    t.values.segment(trace_index(order, dim, 0, k, 0), dim) = ep.left[k];
  }
  return t;
}

// ---------------------------------------------------------------------------
// Boundary flux form

/// Q with Re<A x, x>_X = 1/2 tau^* Q tau + int Re<P_0 y, y> for y = H x.
struct FluxForm {
  Matrix q;
};

/// Repeated integration by parts with P_k^* = (-1)^{k+1} P_k gives
///   Re int y^* P_k y^{(k)} = 1/2 [ sum_{i<k} (-1)^i (y^{(i)})^* P_k y^{(k-1-i)} ]_0^1 .
inline FluxForm flux_form(int order, int dim, const std::vector<Matrix>& principal) {
  const Index t = 2 * Index{order} * dim;
  Matrix q = Matrix::Zero(t, t);
  for (int k = 1; k <= order; ++k) {
    const Matrix& p = principal.at(static_cast<std::size_t>(k - 1));
    for (int i = 0; i < k; ++i) {
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      const int j = k - 1 - i;
      q.block(trace_index(order, dim, 1, i, 0), trace_index(order, dim, 1, j, 0), dim, dim) += sign * p;
      q.block(trace_index(order, dim, 0, i, 0), trace_index(order, dim, 0, j, 0), dim, dim) -= sign * p;
    }
  }
  return {linalg::hermitian_part(q)};
}

/// Flux form of the subsystem normalised to (0, 1).
inline FluxForm flux_form(const PHSubsystem& s) {
  std::vector<Matrix> unit;
  for (int k = 1; k <= s.order; ++k) unit.push_back(s.unit_P(k));
  return flux_form(s.order, s.dim, unit);
}

}  // namespace phnet
