// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iomanip>
#include <locale>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "phnet/analysis.hpp"
#include "phnet/network.hpp"
#include "phnet/scenarios.hpp"
#include "phnet/simulate.hpp"

namespace phnet::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Malformed or schema-invalid network file.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scalars and matrices: real entries as numbers, complex entries as [re, im].

inline json to_json(Scalar z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

inline Scalar scalar_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw SchemaError(where + ": expected a number or [re, im]");
}

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

/// `cols_if_empty` fixes the shape of a matrix given as [] or [[], ...].
inline Matrix matrix_from_json(const json& j, const std::string& where, Index cols_if_empty = 0) {
  if (!j.is_array()) throw SchemaError(where + ": expected a nested array");
  const Index rows = static_cast<Index>(j.size());
  if (rows == 0) return Matrix::Zero(0, cols_if_empty);
  if (!j[0].is_array()) throw SchemaError(where + ": expected rows as arrays");
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw SchemaError(where + ": ragged matrix");
    for (Index c = 0; c < cols; ++c)
      m(r, c) = scalar_from_json(row[static_cast<std::size_t>(c)], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return m;
}

inline std::vector<Index> index_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an array of integers");
  std::vector<Index> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw SchemaError(where + ": expected integers");
    out.push_back(e.get<Index>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrix functions

inline json to_json(const MatrixFunction& f) {
  json out;
  switch (f.kind()) {
    case MatrixFunction::Kind::Constant:
      out["kind"] = "constant";
      out["data"] = to_json(f.data().front());
      break;
    case MatrixFunction::Kind::Polynomial:
    case MatrixFunction::Kind::Sampled: {
      out["kind"] = f.kind() == MatrixFunction::Kind::Polynomial ? "polynomial" : "sampled";
      json data = json::array();
      for (const auto& m : f.data()) data.push_back(to_json(m));
      out["data"] = std::move(data);
      break;
    }
  }
  return out;
}

inline MatrixFunction matrix_function_from_json(const json& j, const std::string& where) {
  if (j.is_array()) return MatrixFunction::constant(matrix_from_json(j, where));
  if (!j.is_object() || !j.contains("kind") || !j.contains("data"))
    throw SchemaError(where + ": expected {kind, data} or a matrix");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") return MatrixFunction::constant(matrix_from_json(j.at("data"), where + ".data"));
  if (kind != "polynomial" && kind != "sampled") throw SchemaError(where + ": unknown kind '" + kind + "'");
  if (!j.at("data").is_array()) throw SchemaError(where + ".data: expected a list of matrices");
  std::vector<Matrix> data;
  for (std::size_t i = 0; i < j.at("data").size(); ++i)
    data.push_back(matrix_from_json(j.at("data")[i], where + ".data[" + std::to_string(i) + "]"));
  try {
    return kind == "polynomial" ? MatrixFunction::polynomial(std::move(data)) : MatrixFunction::sampled(std::move(data));
  } catch (const StructuralError& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Subsystems, controllers, networks

inline json to_json(const PHSubsystem& s) {
  json p = json::array();
  p.push_back(s.p0.empty() ? json(nullptr) : to_json(s.p0));
  for (const auto& m : s.principal) p.push_back(to_json(m));
  return {{"name", s.name},          {"order", s.order},         {"dim", s.dim},
          {"p_matrices", p},         {"hamiltonian", to_json(s.hamiltonian)},
          {"w_b", to_json(s.w_b)},   {"w_c", to_json(s.w_c)},    {"interval", {s.a, s.b}}};
}

inline PHSubsystem subsystem_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  PHSubsystem s;
  try {
    s.name = j.value("name", std::string{});
    s.order = j.at("order").get<int>();
    s.dim = j.at("dim").get<int>();
    const auto& p = j.at("p_matrices");
    if (!p.is_array() || static_cast<int>(p.size()) != s.order + 1)
      throw SchemaError(where + ".p_matrices: expected N + 1 entries P_0 .. P_N");
    if (!p[0].is_null()) s.p0 = matrix_function_from_json(p[0], where + ".p_matrices[0]");
    for (int k = 1; k <= s.order; ++k)
      s.principal.push_back(matrix_from_json(p[static_cast<std::size_t>(k)], where + ".p_matrices[" + std::to_string(k) + "]"));
    s.hamiltonian = matrix_function_from_json(j.at("hamiltonian"), where + ".hamiltonian");
    const Index t = 2 * Index{s.order} * s.dim;
    s.w_b = matrix_from_json(j.at("w_b"), where + ".w_b", t);
    s.w_c = matrix_from_json(j.at("w_c"), where + ".w_c", t);
    if (j.contains("interval")) {
      const auto& iv = j.at("interval");
      if (!iv.is_array() || iv.size() != 2) throw SchemaError(where + ".interval: expected [a, b]");
      s.a = iv[0].get<double>();
      s.b = iv[1].get<double>();
    }
  } catch (const json::exception& e) {
    throw SchemaError(where + ": " + e.what());
  }
  return s;
}

inline json to_json(const Controller& c) {
  return {{"name", c.name},         {"a_c", to_json(c.a_c)}, {"b_c", to_json(c.b_c)},
          {"c_c", to_json(c.c_c)},  {"d_c", to_json(c.d_c)}, {"state_weight", to_json(c.state_weight)}};
}

inline Controller controller_from_json(const json& j, const std::string& where) {
  Controller c;
  try {
    c.name = j.value("name", std::string{});
    c.a_c = matrix_from_json(j.at("a_c"), where + ".a_c");
    c.b_c = matrix_from_json(j.at("b_c"), where + ".b_c");
    c.c_c = matrix_from_json(j.at("c_c"), where + ".c_c", c.a_c.rows());
    c.d_c = matrix_from_json(j.at("d_c"), where + ".d_c");
    c.state_weight = matrix_from_json(j.at("state_weight"), where + ".state_weight");
  } catch (const json::exception& e) {
    throw SchemaError(where + ": " + e.what());
  }
  return c;
}

inline json to_json(const Network& net) {
  json subs = json::array(), ctrls = json::array(), coupling = json::array(), clusters = json::array();
  for (const auto& s : net.subsystems) subs.push_back(to_json(s));
  for (const auto& c : net.controllers) ctrls.push_back(to_json(c));
  for (const auto& c : net.coupling) coupling.push_back(c);
  for (const auto& c : net.clusters) clusters.push_back(c);
  json out = {{"schema", kSchemaVersion}, {"subsystems", subs}, {"controllers", ctrls},
              {"k_mat", to_json(net.k_mat)}, {"coupling", coupling}};
  if (!net.external_ports.empty()) out["external_ports"] = net.external_ports;
  if (!net.clusters.empty()) out["clusters"] = clusters;
  return out;
}

namespace detail {

inline Profile profile_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return Profile::constant(j.get<double>());
  if (j.is_array() && !j.empty()) {
    Profile p;
    p.coeffs.clear();
    for (const auto& c : j) {
      if (!c.is_number()) throw SchemaError(where + ": polynomial coefficients must be numbers");
      p.coeffs.push_back(c.get<double>());
    }
    return p;
  }
  throw SchemaError(where + ": expected a number or a coefficient list");
}

inline std::vector<Profile> profiles_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected one profile per segment");
  std::vector<Profile> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(profile_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace detail

/// Builds a scenario from its name and optional parameter overrides.
inline Network scenario_from_json(const std::string& name, const json& params) {
  if (!params.is_null() && !params.is_object()) throw SchemaError("scenario.params: expected an object");
  if (params.is_null() || params.empty()) return find_scenario(name).build();
  const std::string w = "scenario.params";
  try {
    if (name == "chain" || name == "chain_feedback") {
      ChainOfStringsSpec s;
      s.serial_form = name == "chain";
      s.m = params.value("m", s.m);
      if (params.contains("kappa")) s.kappa = params.at("kappa").get<std::vector<double>>();
      else if (s.m != 3) {
        s.kappa.assign(static_cast<std::size_t>(s.m), 0.0);
        s.kappa[0] = 0.5;
      }
      if (params.contains("rho")) s.rho = detail::profiles_from_json(params.at("rho"), w + ".rho");
      if (params.contains("tension")) s.tension = detail::profiles_from_json(params.at("tension"), w + ".tension");
      if (params.contains("joints")) s.joints = params.at("joints").get<std::vector<double>>();
      s.serial_form = params.value("serial_form", s.serial_form);
      s.paper_literal_sign = params.value("paper_literal_sign", false);
      return build_chain(s);
    }
    if (name == "damped_wave") return build_damped_wave(params.value("kappa", 0.5));
    if (name == "tip_mass_string")
      return build_tip_mass_string(params.value("m", 1.0), params.value("k", 1.0), params.value("r", 1.0));
    if (name == "beam_pinned" || name == "beam_damped" || name == "beam") {
      EulerBernoulliSpec s;
      if (name == "beam_pinned") s.left_pinned = true;
      if (name == "beam_damped") {
        s.k0 = Matrix::Zero(2, 2);
        s.k0(0, 0) = 1.0;
        s.right = BeamEnd::Clamped;
      }
      if (params.contains("rho")) s.rho = detail::profile_from_json(params.at("rho"), w + ".rho");
      if (params.contains("ei")) s.ei = detail::profile_from_json(params.at("ei"), w + ".ei");
      if (params.contains("k0")) s.k0 = matrix_from_json(params.at("k0"), w + ".k0");
      if (params.contains("left")) {
        const auto left = params.at("left").get<std::string>();
        if (left != "pinned" && left != "dissipative") throw SchemaError(w + ".left: expected pinned or dissipative");
        s.left_pinned = left == "pinned";
      }
      if (params.contains("right")) s.right = beam_end_from_string(params.at("right").get<std::string>());
      return build_beam(s);
    }
    if (name == "damper_string_beam" || name == "spring_mass_damper_string_beam") {
      CoupledSpec s;
      if (name != "damper_string_beam") s.variant = CoupledVariant::SpringMassDamperStringBeam;
      if (params.contains("rho")) s.rho = detail::profile_from_json(params.at("rho"), w + ".rho");
      if (params.contains("tension")) s.tension = detail::profile_from_json(params.at("tension"), w + ".tension");
      if (params.contains("beam_rho")) s.beam_rho = detail::profile_from_json(params.at("beam_rho"), w + ".beam_rho");
      if (params.contains("beam_ei")) s.beam_ei = detail::profile_from_json(params.at("beam_ei"), w + ".beam_ei");
      s.kappa = params.value("kappa", s.kappa);
      s.mass = params.value("m", s.mass);
      s.spring = params.value("k", s.spring);
      s.damping = params.value("r", s.damping);
      return build_coupled(s);
    }
    if (name == "free_wave") return build_free_wave();
  } catch (const json::exception& e) {
    throw SchemaError(w + ": " + e.what());
  }
  return find_scenario(name).build();
}

inline Network network_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("network file must be a JSON object");
  if (j.contains("schema") && j.at("schema") != kSchemaVersion)
    throw SchemaError("unsupported schema version " + j.at("schema").dump());
  const bool has_subs = j.contains("subsystems"), has_scenario = j.contains("scenario");
  if (has_subs == has_scenario) throw SchemaError("network file needs either 'subsystems' or 'scenario', not both");
  if (has_scenario) {
    const auto& sc = j.at("scenario");
    if (!sc.is_object() || !sc.contains("name") || !sc.at("name").is_string())
      throw SchemaError("scenario: expected {name, params}");
    return scenario_from_json(sc.at("name").get<std::string>(), sc.value("params", json()));
  }
  Network net;
  const auto& subs = j.at("subsystems");
  if (!subs.is_array()) throw SchemaError("subsystems: expected an array");
  for (std::size_t i = 0; i < subs.size(); ++i)
    net.subsystems.push_back(subsystem_from_json(subs[i], "subsystems[" + std::to_string(i) + "]"));
  if (j.contains("controllers")) {
    const auto& cs = j.at("controllers");
    if (!cs.is_array()) throw SchemaError("controllers: expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i)
      net.controllers.push_back(controller_from_json(cs[i], "controllers[" + std::to_string(i) + "]"));
  }
  if (!j.contains("k_mat")) throw SchemaError("missing k_mat");
  net.k_mat = matrix_from_json(j.at("k_mat"), "k_mat", net.total_outputs());
  if (j.contains("coupling")) {
    if (!j.at("coupling").is_array()) throw SchemaError("coupling: expected an array of port lists");
    for (std::size_t i = 0; i < j.at("coupling").size(); ++i)
      net.coupling.push_back(index_list(j.at("coupling")[i], "coupling[" + std::to_string(i) + "]"));
  }
  if (j.contains("external_ports")) net.external_ports = index_list(j.at("external_ports"), "external_ports");
  if (j.contains("clusters")) {
    if (!j.at("clusters").is_array()) throw SchemaError("clusters: expected an array");
    for (std::size_t i = 0; i < j.at("clusters").size(); ++i)
      net.clusters.push_back(index_list(j.at("clusters")[i], "clusters[" + std::to_string(i) + "]"));
  }
  return net;
}

inline Network parse_network(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return network_from_json(j);
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const PassivityCertificate& c) {
  json out = {{"kind", to_string(c.kind)}, {"pass", c.pass}, {"margin", c.margin}, {"marginal", c.marginal}};
  if (c.witness) out["witness"] = to_json(*c.witness);
  if (!c.note.empty()) out["note"] = c.note;
  return out;
}

inline json to_json(const ValidationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}, {"detail", c.detail}});
  return {{"pass", r.pass()}, {"lipschitz", r.lipschitz}, {"checks", checks}};
}

inline json to_json(const SerialDetection& d) {
  if (const auto* s = std::get_if<SerialStructure>(&d)) {
    json out = {{"serial", true}, {"ordering", s->ordering}, {"blocks", s->blocks}};
    if (!s->local_closures.empty()) out["local_closures"] = s->local_closures;
    return out;
  }
  const auto& n = std::get<NotSerial>(d);
  return {{"serial", false}, {"cycle", n.cycle}, {"blocks", n.blocks}};
}

/// Numbers in CSV use the shortest round-trip representation.
inline std::string num(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline void write_spectrum_csv(std::ostream& os, const SpectrumReport& sp) {
  os << "re,im,resolved,tail\n";
  for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i)
    os << num(sp.eigenvalues[i].real()) << ',' << num(sp.eigenvalues[i].imag()) << ',' << (sp.resolved[i] ? 1 : 0)
       << ',' << num(sp.tail[i]) << '\n';
}

inline void write_resolvent_csv(std::ostream& os, const ResolventScan& scan) {
  os << "beta,norm,diverged\n";
  for (std::size_t i = 0; i < scan.betas.size(); ++i)
    os << num(scan.betas[i]) << ',' << num(scan.norms[i]) << ',' << (scan.diverged[i] ? 1 : 0) << '\n';
}

/// Columns t, H, s<j>_tau<i>; complex-valued traces add s<j>_tau<i>_im columns.
inline void write_energy_csv(std::ostream& os, const EnergyTrace& tr) {
  bool complex = false;
  for (const auto& v : tr.traces) complex = complex || v.imag().cwiseAbs().maxCoeff() > 0.0;
  os << "t,H";
  const bool has_traces = !tr.traces.empty();
  if (has_traces)
    for (std::size_t j = 0; j < tr.trace_offset.size(); ++j)
      for (Index i = 0; i < tr.trace_size[j]; ++i) {
        os << ",s" << j << "_tau" << i;
        if (complex) os << ",s" << j << "_tau" << i << "_im";
      }
  os << '\n';
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    os << num(tr.times[k]) << ',' << num(tr.energies[k]);
    if (has_traces)
      for (Index i = 0; i < tr.traces[k].size(); ++i) {
        os << ',' << num(tr.traces[k](i).real());
        if (complex) os << ',' << num(tr.traces[k](i).imag());
      }
    os << '\n';
  }
}

}  // namespace phnet::io
