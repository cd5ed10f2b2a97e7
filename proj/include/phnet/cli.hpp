// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "phnet/analysis.hpp"
#include "phnet/io.hpp"
#include "phnet/scenarios.hpp"
#include "phnet/simulate.hpp"

namespace phnet::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitSchema = 2;

struct Options {
  std::string file;
  std::string out;
  int n = 48;
  double dt = 0.0;
  double t_end = 10.0;
  std::string x0 = "sine";
  double beta_max = 0.0;
  int samples = 400;
  unsigned long long seed = 0;
  std::string scenario;
};

inline Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::SchemaError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return io::parse_network(buf.str());
}

inline json complex_list(const std::vector<Scalar>& v, std::size_t limit) {
  json out = json::array();
  for (std::size_t i = 0; i < v.size() && i < limit; ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

inline void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  body(f);
}

inline int cmd_check(const Options& o, std::ostream& out) {
  const Network net = load_network(o.file);
  json rep = {{"schema", io::kSchemaVersion}, {"command", "check"}};
  bool valid = true;
  json subs = json::array();
  for (const auto& s : net.subsystems) {
    const auto v = validate_subsystem(s);
    valid = valid && v.pass();
    json e = {{"name", s.name}, {"validation", io::to_json(v)}, {"sym_p0", io::to_json(check_sym_p0(s))}};
    if (s.has_square_ports()) {
      e["impedance"] = io::to_json(check_impedance(s));
      e["scattering"] = io::to_json(check_scattering(s));
    } else {
      e["impedance"] = nullptr;
      e["note"] = "ports are not square; impedance and scattering tests do not apply";
    }
    subs.push_back(std::move(e));
  }
  rep["subsystems"] = subs;
  json ctrls = json::array();
  for (const auto& c : net.controllers) {
    const auto cp = check_controller(c);
    ctrls.push_back({{"name", c.name},
                     {"passive", io::to_json(cp.certificate)},
                     {"strict_input_margin", cp.strict_input_margin}});
  }
  rep["controllers"] = ctrls;
  const auto cert = certify_network_dissipative(net);
  rep["network"] = io::to_json(cert);
  const auto serial = detect_serial_structure(net);
  rep["serial"] = std::holds_alternative<SerialStructure>(serial);
  rep["serial_structure"] = io::to_json(serial);
  rep["certified"] = valid && cert.pass;
  out << rep.dump(2) << '\n';
  return valid && cert.pass ? kExitOk : kExitFailed;
}

inline ResolventOptions scan_options(const Options& o) {
  ResolventOptions r;
  r.beta_max = o.beta_max;
  r.samples = o.samples;
  return r;
}

inline json scan_summary(const ResolventScan& scan) {
  std::size_t div = 0;
  for (bool d : scan.diverged) div += d ? 1 : 0;
  return {{"beta_max", scan.beta_max},
          {"samples", scan.betas.size()},
          {"sup_norm", scan.sup_norm},
          {"trend", std::isfinite(scan.trend) ? json(scan.trend) : json(nullptr)},
          {"diverged", div},
          {"dimension", scan.dimension}};
}

inline const char* kSurrogateNote =
    "exponential stability is judged by a fixed-n surrogate: negative abscissa and bounded resolvent growth "
    "over the scanned band";

inline int cmd_spectrum(const Options& o, std::ostream& out) {
  const Network net = load_network(o.file);
  const auto g = assemble_generator(net, o.n);
  const auto sp = spectrum(g);
  const auto scan = resolvent_scan(g, sp, scan_options(o));
  if (!o.out.empty()) write_file(o.out, [&](std::ostream& f) { io::write_spectrum_csv(f, sp); });
  std::size_t resolved = 0;
  for (bool r : sp.resolved) resolved += r ? 1 : 0;
  json rep = {{"schema", io::kSchemaVersion},
              {"command", "spectrum"},
              {"n", o.n},
              {"abscissa", sp.abscissa},
              {"discrete_abscissa", sp.discrete_abscissa},
              {"numerical_range_max", sp.numerical_range_max},
              {"eigenvalues", sp.eigenvalues.size()},
              {"resolved", resolved},
              {"zero_modes", sp.zero_modes.size()},
              {"dominant", complex_list(sp.resolved_eigenvalues(), 10)},
              {"resolvent", scan_summary(scan)},
              {"asymptotic", asymptotic_verdict(sp)},
              {"verdict", exponential_verdict(sp, scan)},
              {"note", kSurrogateNote}};
  out << rep.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_simulate(const Options& o, std::ostream& out) {
  const Network net = load_network(o.file);
  const auto g = assemble_generator(net, o.n);
  double dt = o.dt;
  if (!(dt > 0)) dt = default_dt(spectrum(g).resolved_eigenvalues());
  const auto x0 = initial_state(g, o.x0, o.seed);
  const auto tr = simulate(g, net, x0, dt, o.t_end);
  if (!o.out.empty()) write_file(o.out, [&](std::ostream& f) { io::write_energy_csv(f, tr); });
  double uptick = 0.0;
  for (std::size_t k = 1; k < tr.energies.size(); ++k)
    if (tr.energies[k - 1] > 0) uptick = std::max(uptick, (tr.energies[k] - tr.energies[k - 1]) / tr.energies[k - 1]);
  json rep = {{"schema", io::kSchemaVersion},
              {"command", "simulate"},
              {"n", o.n},
              {"dt", dt},
              {"steps", tr.times.size() - 1},
              {"x0", o.x0},
              {"H0", tr.energies.front()},
              {"H_end", tr.energies.back()},
              {"max_relative_uptick", uptick},
              {"projection_residual", tr.projection_residual}};
  if (!tr.warning.empty()) rep["warning"] = tr.warning;
  try {
    const auto fit = decay_fit(tr);
    rep["decay_fit"] = {{"M", fit.m}, {"eta", fit.eta}};
  } catch (const std::exception& e) {
    rep["decay_fit"] = nullptr;
    rep["decay_fit_error"] = e.what();
  }
  out << rep.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_resolvent(const Options& o, std::ostream& out) {
  const Network net = load_network(o.file);
  const auto g = assemble_generator(net, o.n);
  const auto sp = spectrum(g);
  const auto scan = resolvent_scan(g, sp, scan_options(o));
  if (!o.out.empty()) write_file(o.out, [&](std::ostream& f) { io::write_resolvent_csv(f, scan); });
  json rep = scan_summary(scan);
  rep["schema"] = io::kSchemaVersion;
  rep["command"] = "resolvent";
  rep["abscissa"] = sp.abscissa;
  rep["verdict"] = exponential_verdict(sp, scan);
  rep["note"] = kSurrogateNote;
  out << rep.dump(2) << '\n';
  return kExitOk;
}

/// Runs one command. Returns 0 on success, 1 when `check` does not certify,
/// 2 on usage, schema or structural errors.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Port-Hamiltonian network checks, spectra, resolvent scans and simulation", "phnet"};
  app.require_subcommand(1);
  Options o;

  auto* check = app.add_subcommand("check", "validate subsystems and certify network dissipativity");
  check->add_option("file", o.file, "network JSON file")->required();

  auto* spec = app.add_subcommand("spectrum", "eigenvalues of the discretized generator");
  spec->add_option("file", o.file, "network JSON file")->required();
  spec->add_option("--n", o.n, "collocation points per subsystem")->capture_default_str();
  spec->add_option("--out", o.out, "eigenvalue CSV path");
  spec->add_option("--beta-max", o.beta_max, "upper end of the resolvent scan");
  spec->add_option("--samples", o.samples, "uniform resolvent samples")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "implicit midpoint time integration");
  sim->add_option("file", o.file, "network JSON file")->required();
  sim->add_option("--n", o.n, "collocation points per subsystem")->capture_default_str();
  sim->add_option("--dt", o.dt, "time step (default from the spectrum)");
  sim->add_option("--t-end", o.t_end, "final time")->capture_default_str();
  sim->add_option("--x0", o.x0, "initial state: sine, bump or random:SEED")->capture_default_str();
  sim->add_option("--seed", o.seed, "seed for random:SEED without an explicit seed")->capture_default_str();
  sim->add_option("--out", o.out, "energy trace CSV path");

  auto* res = app.add_subcommand("resolvent", "resolvent norm along the imaginary axis");
  res->add_option("file", o.file, "network JSON file")->required();
  res->add_option("--n", o.n, "collocation points per subsystem")->capture_default_str();
  res->add_option("--beta-max", o.beta_max, "upper end of the scan");
  res->add_option("--samples", o.samples, "uniform samples")->capture_default_str();
  res->add_option("--out", o.out, "resolvent CSV path");

  auto* scen = app.add_subcommand("scenario", "built-in scenarios");
  scen->require_subcommand(1);
  auto* list = scen->add_subcommand("list", "list built-in scenarios");
  auto* dump = scen->add_subcommand("dump", "print a scenario as a network file");
  dump->add_option("name", o.scenario, "scenario name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitSchema;
  }

  try {
    if (*check) return cmd_check(o, out);
    if (*spec) return cmd_spectrum(o, out);
    if (*sim) return cmd_simulate(o, out);
    if (*res) return cmd_resolvent(o, out);
    if (*list) {
      for (const auto& s : scenario_registry()) out << s.name << '\t' << s.description << '\n';
      return kExitOk;
    }
    if (*dump) {
      out << io::to_json(find_scenario(o.scenario).build()).dump(2) << '\n';
      return kExitOk;
    }
  } catch (const io::SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const StructuralError& e) {
    err << "structural error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSchema;
  }
  return kExitSchema;
}

}  // namespace phnet::cli
