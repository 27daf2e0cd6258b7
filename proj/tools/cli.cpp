#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <numbers>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qscat/continuum.hpp"
#include "qscat/lattice.hpp"
#include "qscat/oracle.hpp"
#include "qscat/ring.hpp"
#include "qscat/single_particle.hpp"
#include "qscat/spa.hpp"
#include "qscat/two_body.hpp"

namespace qscat::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- values

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
  key = trim(key);
  while (!key.empty() && key.front() == '-') key.erase(key.begin());
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "K") return "total_momentum";
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  return key;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError("'" + key + "' expects a finite number, got '" + text + "'");
  return v;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------- sweeps

template <class F>
auto parallel_map(int n, int threads, F&& f) -> std::vector<decltype(f(0))> {
  using T = decltype(f(0));
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i; (i = next++) < n;) {
      try {
        slots[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  int count = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  count = std::clamp(count, 1, std::max(n, 1));
  std::vector<std::thread> pool;
  for (int t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<T> out;
  out.reserve(n);
  // Rethrow the lowest-index failure so errors do not depend on scheduling.
  for (int i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

std::vector<double> sweep(const RunConfig& c, const std::string& prefix, const std::string& list_key) {
  if (c.has(list_key)) {
    auto v = c.numbers(list_key);
    if (v.empty()) throw ConfigError("empty sweep grid '" + list_key + "'");
    return v;
  }
  const std::string from = prefix + "_from", to = prefix + "_to", pts = prefix == "u" ? "points" : prefix + "_points";
  if (!c.has(from) || !c.has(to)) throw ConfigError("sweep needs '" + list_key + "' or '" + from + "'/'" + to + "'");
  const int n = c.integer(pts, 0);
  if (n < 1) throw ConfigError("empty sweep grid: '" + pts + "' must be >= 1");
  const double lo = c.number(from), hi = c.number(to);
  if (n > 1 && !(lo < hi)) throw ConfigError("'" + from + "' must be below '" + to + "'");
  return linspace(lo, hi, n);
}

// ---------------------------------------------------------------- traps

struct TrapSetup {
  TrapSpec spec;
  TransverseOptions options;
  int grid_size = 0;
};

TrapSetup make_trap(const RunConfig& c, const std::string& fallback_kind = "harmonic") {
  const std::string kind = c.text("trap", fallback_kind);
  TrapSetup t;
  t.options.edge_tol = c.number("edge_tol", 1e-10);
  t.options.symmetric_reduction = c.text("symmetric", "true") != "false";
  auto grid_from_config = [&](const TrapKind& k) {
    if (c.has("nc")) {
      const int nc = c.integer("nc", 0);
      if (nc < 3 || nc % 2 == 0) throw ConfigError("'nc' must be an odd grid size >= 3");
      t.options.check_edges = false;  // box of exactly nc sites, every state kept
      return (nc - 1) / 2;
    }
    if (c.has("y_max")) {
      const int y = c.integer("y_max", 0);
      if (y < 1) throw ConfigError("'y_max' must be >= 1");
      return y;
    }
    return auto_half_width(k, 1, t.options.edge_tol);
  };
  if (kind == "harmonic") {
    if (!c.has("omega")) throw ConfigError("harmonic trap needs 'omega'");
    const Harmonic h{c.number("omega")};
    if (!(h.omega > 0)) throw ConfigError("'omega' must be > 0");
    t.spec = TrapSpec{h, grid_from_config(h)};
  } else if (kind == "delta-well") {
    if (!c.has("v0")) throw ConfigError("delta-well trap needs 'v0'");
    const DeltaWell w{c.number("v0")};
    if (!(w.v0 > 0)) throw ConfigError("'v0' must be > 0");
    t.spec = TrapSpec{w, grid_from_config(w)};
  } else if (kind == "two-site") {
    t.spec = TrapSpec::two_site(c.number("v", 1.0));
  } else if (kind == "tabulated") {
    if (!c.has("potential")) throw ConfigError("tabulated trap needs 'potential' as y:value pairs");
    Tabulated tab;
    tab.outside = c.number("outside", 0.0);
    std::stringstream ss(c.text("potential"));
    for (std::string item; std::getline(ss, item, ',');) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("'potential' entries must look like y:value");
      tab.values[static_cast<int>(parse_double("potential", item.substr(0, colon)))] =
          parse_double("potential", item.substr(colon + 1));
    }
    t.spec = TrapSpec{tab, grid_from_config(tab)};
  } else {
    throw ConfigError("unknown trap '" + kind + "' (harmonic, delta-well, two-site, tabulated)");
  }
  t.grid_size = std::holds_alternative<TwoSite>(t.spec.kind) ? 2 : 2 * t.spec.y_max + 1;
  return t;
}

TransverseSpectrum spectrum_of(const TrapSetup& t) { return solve_transverse(t.spec, t.options); }

// ---------------------------------------------------------------- output

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> meta;
};

struct Artifacts {
  std::vector<Table> tables;
  json diagnostics = json::object();
};

void write_table(const fs::path& dir, const RunConfig& c, const Table& t) {
  std::ofstream f(dir / (t.name + ".csv"), std::ios::binary);
  if (!f) throw ConfigError("cannot write " + (dir / (t.name + ".csv")).string());
  f << "# tool: qscat " << kToolVersion << "\n";
  f << "# subcommand: " << c.subcommand << "\n";
  f << "# config_hash: " << c.hash() << "\n";
  for (const auto& [k, v] : c.values) f << "# config." << k << ": " << v << "\n";
  for (const auto& [k, v] : t.meta) f << "# " << k << ": " << v << "\n";
  for (size_t i = 0; i < t.header.size(); ++i) f << (i ? "," : "") << t.header[i];
  f << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
}

json manifest_of(const RunConfig& c, const Artifacts& a) {
  json m;
  m["tool"] = "qscat";
  m["version"] = kToolVersion;
  m["subcommand"] = c.subcommand;
  m["config"] = json(c.values);
  m["config_hash"] = c.hash();
  json outputs = json::array();
  for (const auto& t : a.tables) outputs.push_back({{"file", t.name + ".csv"}, {"rows", t.rows.size()}});
  m["outputs"] = outputs;
  m["diagnostics"] = a.diagnostics;
  return m;
}

// ---------------------------------------------------------------- subcommands

Artifacts run_transverse(const RunConfig& c) {
  const TrapSetup t = make_trap(c);
  const TransverseSpectrum s = spectrum_of(t);
  Table tab{"transverse", {"n", "energy_over_J", "parity", "psi_origin", "confined"}, {}, {}};
  for (int n = 0; n < s.size(); ++n) {
    const char* parity = s.parities[n] == Parity::Even ? "even" : s.parities[n] == Parity::Odd ? "odd" : "none";
    tab.rows.push_back({std::to_string(n), fmt(s.energies(n)), parity, fmt(s.origin_amplitudes(n)),
                        n < s.confined_count ? "1" : "0"});
  }
  tab.meta.emplace_back("grid_sites", std::to_string(t.grid_size));
  Artifacts a;
  a.tables.push_back(std::move(tab));
  a.diagnostics["confined_count"] = s.confined_count;
  return a;
}

Artifacts run_single(const RunConfig& c) {
  const TrapSetup t = make_trap(c);
  const TransverseSpectrum s = spectrum_of(t);
  const double k = c.number("k", 0.0);
  CutoffOptions cut;
  if (c.has("n_cut")) cut.n_cut = c.integer("n_cut", 0);
  cut.tail_tol = c.number("tail_tol", cut.tail_tol);
  const CirValue cir = u_cir(s, k, cut);
  const auto grid = sweep(c, "u", "u");

  struct Row {
    std::vector<std::string> cells;
    std::string status;
  };
  auto rows = parallel_map(static_cast<int>(grid.size()), c.threads, [&](int i) {
    const double u = grid[i];
    try {
      const ScatteringResult r = effective_u1d(s, u, cir);
      const std::string a = r.scattering_length ? fmt(*r.scattering_length) : "";
      const std::string d = r.delta ? fmt(*r.delta) : "";
      return Row{{fmt(u), fmt(r.u1d), fmt(std::atan(r.u1d / kHopping)), a, d, "ok"}, "ok"};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AtResonance) throw;
      return Row{{fmt(u), "", fmt(u < *cir.value() ? std::numbers::pi / 2 : -std::numbers::pi / 2), "", "", "pole"}, "pole"};
    }
  });
  Table tab{"single", {"U_over_J", "U1D_over_J", "atan_U1D", "a_over_d", "delta_k", "status"}, {}, {}};
  for (auto& r : rows) tab.rows.push_back(std::move(r.cells));
  tab.meta.emplace_back("U_CIR_over_J", cir.value() ? fmt(*cir.value()) : "none");
  tab.meta.emplace_back("psi0_origin_sq", fmt(s.psi0_sq()));
  tab.meta.emplace_back("channels", std::to_string(cir.n_cut));
  tab.meta.emplace_back("tail_bound", fmt(cir.tail_bound));
  Artifacts a;
  a.tables.push_back(std::move(tab));
  a.diagnostics["U_CIR"] = cir.value() ? json(*cir.value()) : json(nullptr);
  a.diagnostics["n_cut"] = cir.n_cut;
  a.diagnostics["tail_bound"] = cir.tail_bound;
  a.diagnostics["grid_sites"] = t.grid_size;
  return a;
}

Table continuum_table(const RunConfig& c, const std::string& name, const std::vector<double>& depths, json& diag) {
  const double k = c.number("k", 0.0);
  ContinuumOptions opt;
  struct Point {
    double ucir, err, cross;
  };
  auto pts = parallel_map(static_cast<int>(depths.size()), c.threads, [&](int i) {
    const double v0 = depths[i];
    if (!(v0 > 0)) throw ConfigError("well depth V0 must be > 0, got " + fmt_short(v0));
    const DeltaWell w{v0};
    TransverseOptions o;
    o.edge_tol = c.number("edge_tol", 1e-10);
    const TransverseSpectrum s = solve_transverse(TrapSpec{w, auto_half_width(w, 1, o.edge_tol)}, o);
    const WellProfile well = WellProfile::from_trap(TrapSpec{w, 1});
    const ContinuumSum sum = continuum_sum(well, s.e0(), k, opt);
    const CirValue cir = u_cir_with_continuum(s, well, k, opt);
    const double cross = sum.trapezoid_value ? std::abs(*sum.trapezoid_value - sum.value) : NAN;
    return Point{1.0 / cir.inverse, sum.quadrature_error, cross};
  });
  Table tab{name, {"V0_over_J", "UCIR_over_J"}, {}, {}};
  json d = json::array();
  for (size_t i = 0; i < depths.size(); ++i) {
    tab.rows.push_back({fmt(depths[i]), fmt(pts[i].ucir)});
    d.push_back({{"V0", depths[i]}, {"quadrature_error", pts[i].err},
                 {"trapezoid_difference", std::isfinite(pts[i].cross) ? json(pts[i].cross) : json(nullptr)}});
  }
  diag[name] = d;
  return tab;
}

Artifacts run_continuum(const RunConfig& c) {
  Artifacts a;
  if (c.text("trap", "delta-well") == "tabulated") {
    const TrapSetup t = make_trap(c);
    const TransverseSpectrum s = spectrum_of(t);
    const WellProfile well = WellProfile::from_trap(t.spec);
    const CirValue cir = u_cir_with_continuum(s, well, c.number("k", 0.0));
    Table tab{"continuum", {"V0_over_J", "UCIR_over_J"}, {{fmt(well.v0), fmt(1.0 / cir.inverse)}}, {}};
    a.tables.push_back(std::move(tab));
    return a;
  }
  if (c.text("trap", "delta-well") != "delta-well") throw ConfigError("continuum runs need a delta-well or tabulated trap");
  a.tables.push_back(continuum_table(c, "continuum", sweep(c, "v0", "v0"), a.diagnostics));
  if (c.has("inset_from") || c.has("inset_to")) {
    const int n = c.integer("inset_points", 0);
    if (n < 1) throw ConfigError("empty sweep grid: 'inset_points' must be >= 1");
    a.tables.push_back(continuum_table(c, "continuum_inset", linspace(c.number("inset_from"), c.number("inset_to"), n),
                                       a.diagnostics));
  }
  return a;
}

Artifacts run_ring(const RunConfig& c) {
  const TrapSetup t = make_trap(c);
  const TransverseSpectrum s = spectrum_of(t);
  if (!c.has("lengths")) throw ConfigError("ring runs need 'lengths'");
  const auto grid = sweep(c, "u", "u");
  RingOptions opt;
  opt.max_branch = c.integer("max_branch", 8);
  Artifacts a;
  for (double lf : c.numbers("lengths")) {
    const int length = static_cast<int>(lf);
    if (length != lf || length < 4) throw ConfigError("ring lengths must be integers >= 4");
    auto sols = parallel_map(static_cast<int>(grid.size()), c.threads,
                             [&](int i) { return ring_solutions(s, grid[i], length, opt); });
    Table tab{"ring_L" + std::to_string(length), {"U_over_J", "branch", "k", "energy_over_J"}, {}, {}};
    for (size_t i = 0; i < grid.size(); ++i)
      for (const auto& r : sols[i]) tab.rows.push_back({fmt(r.u), std::to_string(r.branch), fmt(r.k), fmt(r.energy)});
    tab.meta.emplace_back("E0_over_J", fmt(s.e0()));
    a.tables.push_back(std::move(tab));

    const auto cross = ring_cir_crossings(s, length, {grid.front(), grid.back()});
    Table ct{"ring_L" + std::to_string(length) + "_crossings", {"n", "k", "U_over_J"}, {}, {}};
    for (const auto& x : cross) ct.rows.push_back({std::to_string(x.index), fmt(x.k), fmt(x.u)});
    a.tables.push_back(std::move(ct));
  }
  return a;
}

struct KernelSetup {
  TrapSetup trap;
  TransverseSpectrum spectrum;
  OverlapKernel kernel;
};

KernelSetup make_kernel(const RunConfig& c) {
  KernelSetup k{make_trap(c), {}, {}};
  k.spectrum = spectrum_of(k.trap);
  KernelOptions o;
  o.total_momentum = c.number("total_momentum", 0.0);
  if (c.has("n_cut")) o.max_index = c.integer("n_cut", 0);
  const std::string conv = c.text("jk_convention", "physical");
  if (conv == "as-printed") o.convention = JkConvention::AsPrinted;
  else if (conv != "physical") throw ConfigError("'jk_convention' is physical or as-printed");
  k.kernel = build_kernel(k.spectrum, o);
  return k;
}

Table resonance_table(const ResonanceReport& rep, const std::string& name) {
  Table t{name, {"kind", "U_over_J", "class", "weight", "residue"}, {}, {}};
  for (const auto& r : rep.resonances)
    t.rows.push_back({"cir", fmt(r.u), to_string(r.cls), fmt(r.weight), fmt(r.residue)});
  for (const auto& z : rep.zero_crossings)
    t.rows.push_back({"zero_crossing", fmt(z.u), z.resolved ? "resolved" : "unresolved", "", ""});
  return t;
}

void print_report(const ResonanceReport& rep, std::ostream& out) {
  for (const auto& r : rep.resonances) {
    if (r.cls == ResonanceClass::Unresolved) continue;
    out << "CIR U/J = " << fmt_short(r.u) << "  " << to_string(r.cls) << "  weight " << fmt_short(r.weight) << "\n";
  }
  for (const auto& z : rep.zero_crossings)
    if (z.resolved) out << "zero crossing U/J = " << fmt_short(z.u) << "\n";
  const auto hidden = std::count_if(rep.resonances.begin(), rep.resonances.end(),
                                    [](const Resonance& r) { return r.cls == ResonanceClass::Unresolved; });
  if (hidden) out << hidden << " unresolved pole(s) listed in the CSV\n";
}

std::pair<double, double> report_window(const RunConfig& c) {
  const auto grid = c.has("u") || c.has("u_from") ? sweep(c, "u", "u") : std::vector<double>{-100.0, 100.0};
  return {c.number("window_from", grid.front()), c.number("window_to", grid.back())};
}

Artifacts run_resonances(const RunConfig& c, std::ostream& out);

Artifacts run_twobody(const RunConfig& c, std::ostream& out) {
  // A bare --resonances run needs no sweep grid.
  if (c.flag("resonances") && !c.has("u") && !c.has("u_from") && !c.has("u_to")) return run_resonances(c, out);
  const KernelSetup ks = make_kernel(c);
  const OverlapKernel& k = ks.kernel;
  const auto grid = sweep(c, "u", "u");
  const std::string method = c.text("method", "direct");
  const int order = c.integer("born_order", 100);
  if (method != "direct" && method != "spectral" && method != "born")
    throw ConfigError("'method' is direct, spectral or born");
  if (order < 1) throw ConfigError("'born_order' must be >= 1");

  struct Row {
    std::vector<std::string> cells;
    std::string status;
  };
  const std::string nc = std::to_string(ks.trap.grid_size), kk = fmt(k.total_momentum);
  auto rows = parallel_map(static_cast<int>(grid.size()), c.threads, [&](int i) {
    const double u = grid[i];
    try {
      double u1d;
      std::string label;
      if (method == "direct") {
        const auto r = solve_scattering_length(k, u);
        u1d = r.u1d;
        label = r.method;
      } else if (method == "spectral") {
        u1d = spectral_u1d(k, u);
        label = "spectral";
      } else {
        const auto r = born_series(k, u, order);
        u1d = r.result.u1d;
        label = r.result.method;
      }
      return Row{{fmt(u), fmt(u1d), fmt(std::atan(u1d / kHopping)), label, nc, kk}, "ok"};
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SingularSystem) return Row{{fmt(u), "", "", "pole", nc, kk}, "pole"};
      if (e.kind() == ErrorKind::Diverging) return Row{{fmt(u), "", "", "diverging", nc, kk}, "diverging"};
      throw;
    }
  });
  Table tab{"twobody", {"U_over_J", "U1D_over_J", "atan_U1D", "method", "Nc", "K"}, {}, {}};
  json statuses = json::array();
  for (auto& r : rows) {
    tab.rows.push_back(std::move(r.cells));
    statuses.push_back(r.status);
  }
  tab.meta.emplace_back("R0000", fmt(k.r0000()));
  tab.meta.emplace_back("closed_channels", std::to_string(k.closed_count()));
  Artifacts a;
  a.tables.push_back(std::move(tab));
  a.diagnostics["R0000"] = k.r0000();
  a.diagnostics["closed_channels"] = k.closed_count();
  a.diagnostics["status"] = statuses;
  if (c.flag("resonances")) {
    const auto rep = locate_resonances(k, report_window(c));
    print_report(rep, out);
    a.tables.push_back(resonance_table(rep, "twobody_resonances"));
  }
  return a;
}

Artifacts run_resonances(const RunConfig& c, std::ostream& out) {
  const KernelSetup ks = make_kernel(c);
  const auto rep = locate_resonances(ks.kernel, report_window(c));
  print_report(rep, out);
  Artifacts a;
  a.tables.push_back(resonance_table(rep, "resonances"));
  a.diagnostics["R0000"] = ks.kernel.r0000();
  return a;
}

std::vector<CurvePoint> read_curve(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read curve file '" + path + "'");
  std::vector<std::string> header;
  std::vector<CurvePoint> pts;
  int iu = -1, iv = -1;
  for (std::string line; std::getline(f, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(trim(cell));
    if (header.empty()) {
      header = cells;
      for (size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "U_over_J") iu = static_cast<int>(i);
        if (cells[i] == "U1D_over_J") iv = static_cast<int>(i);
      }
      if (iu < 0 || iv < 0) throw ConfigError("curve file needs U_over_J and U1D_over_J columns");
      continue;
    }
    if (static_cast<int>(cells.size()) <= std::max(iu, iv) || cells[iv].empty()) continue;
    pts.push_back({parse_double("curve", cells[iu]), parse_double("curve", cells[iv])});
  }
  if (pts.size() < 2) throw ConfigError("curve file holds fewer than two usable points");
  return pts;
}

Artifacts run_spa(const RunConfig& c) {
  std::vector<CurvePoint> curve;
  double r0000;
  std::vector<double> poles;
  std::optional<KernelSetup> ks;
  if (c.has("curve")) {
    if (!c.has("r0000")) throw ConfigError("fitting a curve file needs 'r0000'");
    curve = read_curve(c.text("curve"));
    r0000 = c.number("r0000");
  } else {
    ks = make_kernel(c);
    r0000 = ks->kernel.r0000();
    const int n = c.integer("fit_points", 50);
    if (n < 2) throw ConfigError("'fit_points' must be >= 2");
    const auto grid = linspace(c.number("fit_from", -1000.0), c.number("fit_to", -900.0), n);
    for (double u : grid) curve.push_back({u, solve_scattering_length(ks->kernel, u).u1d});
    for (Eigen::Index i = 0; i < ks->kernel.mu.size(); ++i)
      if (ks->kernel.mu(i) > 0) poles.push_back(-1.0 / ks->kernel.mu(i));
  }
  const SpaFit fit = spa_fit(curve, r0000, poles);
  Table tab{"spa_fit",
            {"c1_over_J", "c2_over_J2", "estimate_c1", "estimate_c2", "spread", "midpoint", "U_lo", "U_hi", "n_points",
             "max_residual", "R0000"},
            {},
            {}};
  tab.rows.push_back({fmt(fit.c1), fmt(fit.c2), fmt(fit.estimate_c1), fit.estimate_c2 ? fmt(*fit.estimate_c2) : "",
                      fit.spread ? fmt(*fit.spread) : "", fmt(fit.midpoint), fmt(fit.window.first),
                      fmt(fit.window.second), std::to_string(fit.n_points), fmt(fit.max_residual), fmt(r0000)});
  Artifacts a;
  a.tables.push_back(std::move(tab));
  if (ks && (c.has("u") || c.has("u_from"))) {
    const auto grid = sweep(c, "u", "u");
    const auto model = spa_curve(grid, r0000, fit.midpoint);
    Table ov{"spa_curve", {"U_over_J", "U1D_exact", "U1D_spa"}, {}, {}};
    for (size_t i = 0; i < grid.size(); ++i) {
      std::string exact;
      try {
        exact = fmt(solve_scattering_length(ks->kernel, grid[i]).u1d);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularSystem) throw;
      }
      ov.rows.push_back({fmt(grid[i]), exact, fmt(model[i].u1d)});
    }
    a.tables.push_back(std::move(ov));
  }
  return a;
}

Artifacts run_oracle(const RunConfig& c) {
  if (!c.flag("validate")) throw ConfigError("oracle runs are validation-only; pass --validate");
  const std::string mode = c.text("mode", "single");
  const auto grid = sweep(c, "u", "u");
  const TrapSetup t = make_trap(c);
  Table tab{"oracle", {"U_over_J", "a_oracle", "a_channel", "relative_difference"}, {}, {}};
  if (mode == "single") {
    const TransverseSpectrum s = spectrum_of(t);
    for (double u : grid) {
      StripProblem p{t.spec, c.integer("lx", 400), Boundary::Open, u};
      const auto o = strip_scattering_length(p);
      const auto r = effective_u1d(s, u, 0.0);
      const double ao = o.scattering_length.value_or(NAN), ac = r.scattering_length.value_or(NAN);
      tab.rows.push_back({fmt(u), fmt(ao), fmt(ac), fmt(std::abs(ao - ac) / std::abs(ac))});
    }
  } else if (mode == "pair") {
    const KernelSetup ks = make_kernel(c);
    for (double u : grid) {
      StripProblem p{t.spec, c.integer("lx", 200), Boundary::Open, u};
      const auto o = pair_scattering_length(p, ks.kernel.total_momentum);
      const auto r = solve_scattering_length(ks.kernel, u);
      const double ao = o.scattering_length.value_or(NAN), ac = r.scattering_length.value_or(NAN);
      tab.rows.push_back({fmt(u), fmt(ao), fmt(ac), fmt(std::abs(ao - ac) / std::abs(ac))});
    }
  } else {
    throw ConfigError("oracle 'mode' is single or pair");
  }
  Artifacts a;
  a.tables.push_back(std::move(tab));
  return a;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message, int code,
                  std::optional<double> pole = std::nullopt) {
  json rec;
  rec["error"] = kind;
  rec["message"] = message;
  rec["exit_code"] = code;
  if (pole) rec["pole"] = *pole;
  err << rec.dump() << "\n";
}

}  // namespace

// ---------------------------------------------------------------- RunConfig

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double RunConfig::number(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing required key '" + key + "'");
  return parse_double(key, it->second);
}

double RunConfig::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::optional<double> RunConfig::maybe_number(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

int RunConfig::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("'" + key + "' expects an integer");
  return static_cast<int>(v);
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(text(key));
  for (std::string item; std::getline(ss, item, ',');)
    if (!trim(item).empty()) out.push_back(parse_double(key, item));
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string v = text(key, "false");
  return v == "true" || v == "1" || v == "yes";
}

std::string RunConfig::hash() const {
  std::string canon = subcommand + "\n";
  for (const auto& [k, v] : values) canon += k + "=" + v + "\n";
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  int line_no = 0;
  for (std::string line; std::getline(ss, line);) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = normalize_key(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return kExitConfig;
    case ErrorKind::NoConvergence:
    case ErrorKind::Diverging:
    case ErrorKind::QuadratureFail:
    case ErrorKind::TailTooLarge:
    case ErrorKind::NoRootInBranch:
    case ErrorKind::BranchCollision:
    case ErrorKind::SharpResonanceUnresolved:
    case ErrorKind::FitWindowTooSmall:
    case ErrorKind::ContaminatedChannel:
      return kExitSolver;
    case ErrorKind::OpenChannel:
    case ErrorKind::EdgeLeak:
    case ErrorKind::NonSymmetric:
    case ErrorKind::SignConventionViolation:
    case ErrorKind::UnphysicalAmplitude:
    case ErrorKind::AtResonance:
    case ErrorKind::SingularSystem:
    case ErrorKind::PoleInWindow:
      return kExitRegime;
  }
  return kExitSolver;
}

std::vector<std::string> figure_names() { return {"fig1", "fig2", "fig3", "fig4", "fig5", "two-site"}; }

RunConfig figure_recipe(const std::string& name) {
  RunConfig c;
  auto& v = c.values;
  if (name == "fig1") {
    c.subcommand = "single";
    v = {{"trap", "harmonic"}, {"omega", "1e-3"}, {"k", "0"}, {"u_from", "-30"}, {"u_to", "30"}, {"points", "600"}};
  } else if (name == "fig2") {
    c.subcommand = "continuum";
    v = {{"trap", "delta-well"}, {"k", "0"},          {"v0_from", "0.1"},  {"v0_to", "20"},
         {"v0_points", "400"},   {"inset_from", "0.1"}, {"inset_to", "2"}, {"inset_points", "200"}};
  } else if (name == "fig3") {
    c.subcommand = "ring";
    v = {{"trap", "harmonic"}, {"omega", "1e-3"},   {"lengths", "10,50,1000"}, {"u_from", "-30"},
         {"u_to", "30"},       {"points", "600"},   {"max_branch", "8"}};
  } else if (name == "fig4") {
    c.subcommand = "twobody";
    v = {{"trap", "harmonic"}, {"omega", "1e-3"}, {"nc", "41"},     {"total_momentum", "0"},
         {"u_from", "-30"},    {"u_to", "30"},    {"points", "600"}, {"resonances", "true"}};
  } else if (name == "fig5") {
    c.subcommand = "twobody";
    v = {{"trap", "harmonic"}, {"omega", "1e-1"}, {"nc", "21"},     {"total_momentum", "0"},
         {"u_from", "-30"},    {"u_to", "30"},    {"points", "600"}, {"resonances", "true"}};
  } else if (name == "two-site") {
    c.subcommand = "twobody";
    v = {{"trap", "two-site"}, {"v", "1"},       {"total_momentum", "0"}, {"u_from", "-40"},
         {"u_to", "10"},       {"points", "500"}, {"resonances", "true"}};
  } else {
    throw ConfigError("unknown figure '" + name + "' (fig1..fig5, two-site)", "UnknownFigure");
  }
  return c;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.subcommand == "figure") {
      RunConfig recipe = figure_recipe(config.text("name"));
      recipe.output = config.output;
      recipe.threads = config.threads;
      return run(recipe, out, err);
    }
    Artifacts a;
    const std::string& s = config.subcommand;
    if (s == "transverse") a = run_transverse(config);
    else if (s == "single") a = run_single(config);
    else if (s == "continuum") a = run_continuum(config);
    else if (s == "ring") a = run_ring(config);
    else if (s == "twobody") a = run_twobody(config, out);
    else if (s == "resonances") a = run_resonances(config, out);
    else if (s == "spa-fit") a = run_spa(config);
    else if (s == "oracle") a = run_oracle(config);
    else throw ConfigError("unknown subcommand '" + s + "'");

    const fs::path dir(config.output);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + config.output + "'");
    for (const auto& t : a.tables) {
      write_table(dir, config, t);
      out << (dir / (t.name + ".csv")).string() << "\n";
    }
    std::ofstream m(dir / "manifest.json", std::ios::binary);
    m << manifest_of(config, a).dump(2) << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    report_error(err, e.code(), e.what(), kExitConfig);
    return kExitConfig;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    report_error(err, std::string(to_string(e.kind())), e.what(), code, e.pole());
    return code;
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what(), kExitSolver);
    return kExitSolver;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Quasi-one-dimensional lattice scattering: effective couplings, resonances and phase shifts"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::string config_file, manifest_file, output;
  int threads = 0;
  app.add_option("--config", config_file, "flat key = value config file; flags override it");
  app.add_option("--from-manifest", manifest_file, "rerun the configuration recorded in a manifest.json");
  app.add_option("-o,--output", output, "output directory (default: out)");
  app.add_option("--threads", threads, "worker threads for sweeps (default: all cores)")->check(CLI::NonNegativeNumber);

  struct Key {
    const char* flag;
    const char* key;
    const char* help;
  };
  const std::vector<Key> keys = {
      {"--trap", "trap", "harmonic | delta-well | two-site | tabulated"},
      {"--omega", "omega", "harmonic trap strength"},
      {"--v0", "v0", "delta-well depth"},
      {"--v", "v", "two-site step height"},
      {"--potential", "potential", "tabulated trap as y:value,y:value"},
      {"--outside", "outside", "tabulated potential outside the listed sites"},
      {"--y-max", "y_max", "transverse grid half-width"},
      {"--nc", "nc", "transverse grid size (odd); every state of the box is kept"},
      {"--n-cut", "n_cut", "highest transverse index summed"},
      {"--k", "k", "incoming quasi-momentum"},
      {"--K,--total-momentum", "total_momentum", "pair total quasi-momentum"},
      {"--u", "u", "comma-separated couplings U/J"},
      {"--u-from", "u_from", "first coupling of the sweep"},
      {"--u-to", "u_to", "last coupling of the sweep"},
      {"--points", "points", "number of sweep points"},
      {"--v0-from", "v0_from", "first well depth"},
      {"--v0-to", "v0_to", "last well depth"},
      {"--v0-points", "v0_points", "number of well depths"},
      {"--inset-from", "inset_from", "first depth of the inset sweep"},
      {"--inset-to", "inset_to", "last depth of the inset sweep"},
      {"--inset-points", "inset_points", "number of inset depths"},
      {"--lengths", "lengths", "comma-separated ring lengths"},
      {"--max-branch", "max_branch", "highest ring branch reported"},
      {"--method", "method", "direct | spectral | born"},
      {"--born-order", "born_order", "Born series order"},
      {"--window-from", "window_from", "resonance window start"},
      {"--window-to", "window_to", "resonance window end"},
      {"--fit-from", "fit_from", "SPA fit window start"},
      {"--fit-to", "fit_to", "SPA fit window end"},
      {"--fit-points", "fit_points", "SPA fit point count"},
      {"--curve", "curve", "CSV with U_over_J,U1D_over_J to fit"},
      {"--r0000", "r0000", "R(0,0;0,0) for curve fits"},
      {"--mode", "mode", "oracle mode: single | pair"},
      {"--lx", "lx", "oracle strip half-length"},
      {"--name", "name", "figure recipe name"},
      {"--edge-tol", "edge_tol", "edge decay tolerance"},
      {"--tail-tol", "tail_tol", "closed-channel tail tolerance"},
      {"--jk-convention", "jk_convention", "physical | as-printed"},
      {"--symmetric", "symmetric", "use the parity-reduced eigensolver (true/false)"},
  };
  const std::vector<Key> flags = {
      {"--resonances", "resonances", "also locate resonances and zero crossings"},
      {"--validate", "validate", "enable validation-only oracle runs"},
  };
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"transverse", "transverse spectrum of the trap"},
      {"single", "single-particle effective coupling sweep"},
      {"continuum", "CIR position for traps with a transverse continuum"},
      {"ring", "allowed energies on a periodic ring"},
      {"twobody", "two-body effective coupling sweep"},
      {"spa-fit", "single-pole fit of the strong-coupling tail"},
      {"resonances", "two-body resonance report"},
      {"oracle", "brute-force validation runs"},
      {"figure", "run a canned figure recipe"},
  };

  std::map<std::string, std::string> cli_values;
  std::map<std::string, bool> cli_flags;
  std::vector<CLI::App*> apps;
  for (const auto& [name, help] : subs) {
    CLI::App* sub = app.add_subcommand(name, help);
    if (name == "oracle") sub->group("");  // validation tooling stays out of --help
    for (const auto& k : keys) {
      sub->add_option_function<std::string>(k.flag, [&cli_values, key = std::string(k.key)](const std::string& v) {
        cli_values[key] = v;
      }, k.help);
    }
    for (const auto& f : flags) {
      sub->add_flag_function(f.flag, [&cli_flags, key = std::string(f.key)](std::int64_t n) { cli_flags[key] = n > 0; },
                             f.help);
    }
    apps.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  RunConfig cfg;
  try {
    if (!manifest_file.empty()) {
      std::ifstream f(manifest_file);
      if (!f) throw ConfigError("cannot read manifest '" + manifest_file + "'");
      const json m = json::parse(f, nullptr, false);
      if (m.is_discarded() || !m.contains("subcommand") || !m.contains("config"))
        throw ConfigError("manifest '" + manifest_file + "' is not a qscat manifest");
      cfg.subcommand = m["subcommand"].get<std::string>();
      for (const auto& [k, v] : m["config"].items()) cfg.values[k] = v.get<std::string>();
    }
    for (auto* sub : apps)
      if (sub->parsed()) cfg.subcommand = sub->get_name();
    if (cfg.subcommand.empty()) throw ConfigError("no subcommand given (see --help)");
    if (!config_file.empty()) {
      std::ifstream f(config_file);
      if (!f) throw ConfigError("cannot read config file '" + config_file + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      for (const auto& [k, v] : parse_config_text(ss.str())) cfg.values[k] = v;
    }
    for (const auto& [k, v] : cli_values) cfg.values[k] = v;
    for (const auto& [k, v] : cli_flags) cfg.values[k] = v ? "true" : "false";
  } catch (const ConfigError& e) {
    report_error(std::cerr, e.code(), e.what(), kExitConfig);
    return kExitConfig;
  }
  cfg.threads = threads;
  if (!output.empty()) cfg.output = output;
  else if (cfg.subcommand == "figure") cfg.output = "out/" + cfg.text("name", "figure");
  return run(cfg, std::cout, std::cerr);
}

}  // namespace qscat::cli
