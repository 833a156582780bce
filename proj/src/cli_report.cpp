#include "curvgate/cli_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include "curvgate/errors.hpp"

namespace curvgate {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(x)) throw ConfigError(key + ": not a number: '" + v + "'");
  return x;
}

long long parse_integer(const std::string& key, const std::string& v, long long lo) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  if (x < lo) throw ConfigError(key + ": must be at least " + std::to_string(lo));
  return x;
}

double positive(const std::string& key, double x) {
  if (!(x > 0.0)) throw ConfigError(key + ": must be positive");
  return x;
}

Verdict parse_verdict(const std::string& key, const std::string& v) {
  for (Verdict x : {Verdict::Holds, Verdict::HoldsStrictly, Verdict::Violated, Verdict::Inconclusive})
    if (v == to_string(x)) return x;
  throw ConfigError(key + ": unknown verdict '" + v + "' (Holds, HoldsStrictly, Violated, Inconclusive)");
}

// Config echoes in summaries; data values keep full precision.
std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool is_auto(const std::string& v) { return v == "auto"; }

const std::set<std::string>& expect_ids() {
  static const std::set<std::string> ids = [] {
    std::set<std::string> s(check_ids().begin(), check_ids().end());
    s.insert({"fiber-gate", "psi-gate", "scan"});
    return s;
  }();
  return ids;
}

bool matches(Verdict expected, Verdict got) {
  if (expected == Verdict::Holds) return got == Verdict::Holds || got == Verdict::HoldsStrictly;
  return expected == got;
}

bool needs_metric(const std::string& id) { return id == "cor26" || id == "q3" || id == "e1pos" || id == "nbhd"; }

struct Pipeline {
  std::shared_ptr<const BundleSpec> b;
  VerticalCurvatureField rf;
  CSearchOptions opt;
  std::optional<EpsilonDelta> search;
  std::shared_ptr<const TotalMetricField> g;
  double C = 0.0;
};

Pipeline prepare(const RunConfig& cfg, bool with_metric) {
  Pipeline p;
  p.b = make_bundle(cfg.bundle);
  p.rf = rf_catalog(cfg.rf_kind, *p.b, cfg.rf_amplitude);
  p.opt.rotational = cfg.metric_kind == "connection";
  p.opt.r_max = cfg.metric_rmax;
  // The Q3 gate joins the search only when q3 is requested; it costs a
  // metric build per tested C.
  if (std::count(cfg.checks.begin(), cfg.checks.end(), "q3")) p.opt.q3_radius = cfg.q3_radius;
  if (!with_metric) return p;
  if (cfg.metric_C) {
    p.C = *cfg.metric_C;
  } else {
    p.search = choose_C(p.b, p.rf, cfg.plan, p.opt);
    p.C = p.search->C;
  }
  p.g = boosted_metric(p.b, p.rf, p.C, p.opt);
  return p;
}

void apply_tolerances(MarginReport& r, const RunConfig& cfg) {
  double tol = r.tol;
  if (r.tol == kAlgebraicTol) tol = cfg.tol_algebraic;
  else if (r.tol == kStencilTol) tol = cfg.tol_stencil;
  if (tol == r.tol) return;
  r.tol = tol;
  r.finalize();
}

void judge(const RunConfig& cfg, const std::string& id, Verdict got, double worst, std::vector<std::string>& failures) {
  const auto it = cfg.expect.find(id);
  if (it != cfg.expect.end()) {
    if (!matches(it->second, got))
      failures.push_back(id + ": expected " + to_string(it->second) + ", got " + to_string(got) +
                         " (worst margin " + format_double(worst) + ")");
  } else if (got == Verdict::Violated) {
    failures.push_back(id + ": Violated (worst margin " + format_double(worst) + ")");
  }
}

void write_header(std::ostream& os, const char* title, const RunConfig& cfg) {
  os << title << "\n";
  os << "bundle: " << cfg.bundle << "\n";
  os << "rf: " << cfg.rf_kind << " (amplitude " << short_double(cfg.rf_amplitude) << ")\n";
  os << "plan: seed " << cfg.plan.seed << ", " << cfg.plan.n_points << " points x " << cfg.plan.n_tuples
     << " tuples per chart, gauge " << to_string(cfg.plan.gauge) << "\n";
}

void write_metric(std::ostream& os, const RunConfig& cfg, double C, const std::optional<EpsilonDelta>& search) {
  os << "metric: " << cfg.metric_kind << ", C " << format_double(C)
     << (search ? " (searched, sufficient, not minimal)" : " (from config)") << ", r_max "
     << short_double(cfg.metric_rmax) << "\n";
  if (search) {
    os << "search: " << to_string(search->verdict) << ", eps " << format_double(search->eps) << ", delta "
       << format_double(search->delta) << ", delta1 " << format_double(search->delta1) << ", delta2 "
       << format_double(search->delta2) << ", doublings " << search->doublings << "\n";
    os << "search note: " << search->note << "\n";
  }
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  fn(f);
}

std::filesystem::path output_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("output: cannot create '" + cfg.output + "': " + ec.message());
  return dir;
}

}  // namespace

const std::vector<std::string>& check_ids() {
  static const std::vector<std::string> ids = {"thmA", "thmB", "thmC", "sw", "cor26", "eps", "q3", "e1pos", "nbhd"};
  return ids;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  bool have_bundle = false, have_seed = false;
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key.empty() || v.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    if (!seen.insert(key).second) throw ConfigError(key + ": given twice");

    if (key == "bundle") {
      const auto ids = catalog_ids();
      if (std::find(ids.begin(), ids.end(), v) == ids.end()) throw ConfigError("bundle: unknown catalog id '" + v + "'");
      cfg.bundle = v;
      have_bundle = true;
    } else if (key == "checks") {
      cfg.checks = split_list(v);
      if (cfg.checks.empty()) throw ConfigError("checks: empty list");
      for (const auto& id : cfg.checks)
        if (std::find(check_ids().begin(), check_ids().end(), id) == check_ids().end())
          throw ConfigError("checks: unknown inequality id '" + id + "'");
    } else if (key.rfind("expect.", 0) == 0) {
      const std::string id = key.substr(7);
      if (!expect_ids().count(id)) throw ConfigError(key + ": unknown inequality id '" + id + "'");
      cfg.expect[id] = parse_verdict(key, v);
    } else if (key == "plan.seed") {
      cfg.plan.seed = static_cast<std::uint64_t>(parse_integer(key, v, 0));
      have_seed = true;
    } else if (key == "plan.points") {
      cfg.plan.n_points = static_cast<int>(parse_integer(key, v, 1));
    } else if (key == "plan.tuples") {
      cfg.plan.n_tuples = static_cast<int>(parse_integer(key, v, 1));
    } else if (key == "plan.gauge") {
      try {
        cfg.plan.gauge = parse_gauge(v);
      } catch (const StructuralError& e) {
        throw ConfigError(key + ": " + e.what());
      }
    } else if (key == "plan.threads") {
      cfg.plan.threads = static_cast<int>(parse_integer(key, v, 0));
    } else if (key == "metric.kind") {
      if (v != "connection" && v != "warped") throw ConfigError(key + ": expected connection or warped");
      cfg.metric_kind = v;
    } else if (key == "metric.C") {
      if (is_auto(v)) cfg.metric_C.reset();
      else cfg.metric_C = parse_number(key, v);
      if (cfg.metric_C && *cfg.metric_C < 0.0) throw ConfigError(key + ": must be nonnegative or auto");
    } else if (key == "metric.r0") {
      cfg.metric_r0 = positive(key, parse_number(key, v));
    } else if (key == "metric.rmax") {
      cfg.metric_rmax = positive(key, parse_number(key, v));
    } else if (key == "rf.kind") {
      if (v != "zero" && v != "height" && v != "anisotropic")
        throw ConfigError(key + ": expected zero, height or anisotropic");
      cfg.rf_kind = v;
    } else if (key == "rf.amplitude") {
      cfg.rf_amplitude = parse_number(key, v);
    } else if (key == "eps_diam") {
      cfg.eps_diam = parse_number(key, v);
      if (cfg.eps_diam < 0.0) throw ConfigError(key + ": must be nonnegative");
    } else if (key == "eps_hypothesis") {
      if (is_auto(v)) {
        cfg.eps_hypothesis.reset();
      } else {
        const double e = parse_number(key, v);
        if (!(e > 0.0 && e < 1.0)) throw ConfigError(key + ": must lie in (0, 1)");
        cfg.eps_hypothesis = e;
      }
    } else if (key == "r_test") {
      cfg.r_test = positive(key, parse_number(key, v));
    } else if (key == "q3.radius") {
      cfg.q3_radius = positive(key, parse_number(key, v));
    } else if (key == "tol.algebraic") {
      cfg.tol_algebraic = positive(key, parse_number(key, v));
    } else if (key == "tol.stencil") {
      cfg.tol_stencil = positive(key, parse_number(key, v));
    } else if (key == "scan.radii") {
      cfg.scan_radii.clear();
      for (const auto& item : split_list(v)) cfg.scan_radii.push_back(parse_number(key, item));
      if (cfg.scan_radii.empty()) throw ConfigError(key + ": empty list");
      for (std::size_t i = 0; i < cfg.scan_radii.size(); ++i) {
        if (cfg.scan_radii[i] < 0.0) throw ConfigError(key + ": radii must be nonnegative");
        if (i > 0 && !(cfg.scan_radii[i] > cfg.scan_radii[i - 1]))
          throw ConfigError(key + ": radii must be strictly increasing");
      }
    } else if (key == "output") {
      cfg.output = v;
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  if (!have_bundle) throw ConfigError("missing key 'bundle'");
  if (!have_seed) throw ConfigError("missing key 'plan.seed'");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

CheckRun run_checks(const RunConfig& cfg) {
  const bool with_metric = std::any_of(cfg.checks.begin(), cfg.checks.end(), needs_metric);
  Pipeline p = prepare(cfg, with_metric);
  CheckRun run;
  run.C = p.C;
  run.search = p.search;

  const bool needs_eps = std::count(cfg.checks.begin(), cfg.checks.end(), "eps") +
                             std::count(cfg.checks.begin(), cfg.checks.end(), "q3") > 0;
  if (cfg.eps_hypothesis) run.eps_hypothesis = *cfg.eps_hypothesis;
  else if (p.search) run.eps_hypothesis = p.search->eps;
  else if (needs_eps) run.eps_hypothesis = choose_eps(*p.b, p.rf, cfg.plan);

  const auto& plan = cfg.plan;
  for (const auto& id : cfg.checks) {
    MarginReport r;
    if (id == "thmA") r = check_theoremA(*p.b, p.rf, plan);
    else if (id == "thmB") r = check_theoremB(*p.b, plan);
    else if (id == "thmC") r = check_theoremC(*p.b, p.rf, plan);
    else if (id == "sw") r = check_strake_walschap(*p.b, plan, cfg.eps_diam);
    else if (id == "cor26") r = check_walschap_corollary(*p.g, plan);
    else if (id == "eps") r = check_eps_inequality(*p.b, p.rf, plan, run.eps_hypothesis);
    else if (id == "q3") r = check_q3(*p.g, plan, cfg.q3_radius, run.eps_hypothesis);
    else if (id == "e1pos") r = check_sphere_bundle_positive(*p.g, cfg.metric_r0, plan);
    else if (id == "nbhd") r = check_neighborhood(*p.g, plan, cfg.r_test);
    else throw ConfigError("checks: unknown inequality id '" + id + "'");
    apply_tolerances(r, cfg);
    judge(cfg, id, r.verdict, r.worst_margin, run.failures);
    run.reports.push_back(std::move(r));
  }
  // Gate reports from the C search go after the requested checks; they only
  // count against the run when an expectation names them.
  if (p.search) {
    for (const auto& r : p.search->reports) {
      if (r.id == "q3") continue;
      if (cfg.expect.count(r.id)) judge(cfg, r.id, r.verdict, r.worst_margin, run.failures);
      run.reports.push_back(r);
    }
  }
  return run;
}

ScanRun run_scan(const RunConfig& cfg) {
  Pipeline p = prepare(cfg, true);
  ScanRun run;
  run.C = p.C;
  run.search = p.search;
  for (double r : cfg.scan_radii) {
    const MarginReport rep = sectional_at_radius(*p.g, cfg.plan, r);
    ScanRow row;
    row.radius = r;
    row.samples = static_cast<int>(rep.entries.size());
    row.min_sectional = rep.worst_margin;
    row.worst_sample = rep.worst >= 0 ? rep.entries[rep.worst].sample_index : -1;
    row.max_sectional = rep.entries.empty() ? 0.0 : rep.entries.front().margin;
    for (const auto& e : rep.entries) row.max_sectional = std::max(row.max_sectional, e.margin);
    run.rows.push_back(row);
  }
  return run;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_report_csv(std::ostream& os, const std::vector<MarginReport>& reports) {
  os << "inequality_id,sample_index,chart,lhs,rhs,margin,verdict,paper_ref\r\n";
  for (const auto& r : reports) {
    const std::string tail = std::string(",") + to_string(r.verdict) + "," + csv_field(r.paper_ref) + "\r\n";
    for (const auto& e : r.entries)
      os << csv_field(r.id) << ',' << e.sample_index << ',' << e.chart << ',' << format_double(e.lhs) << ','
         << format_double(e.rhs) << ',' << format_double(e.margin) << tail;
  }
}

void write_summary(std::ostream& os, const RunConfig& cfg, const CheckRun& run) {
  write_header(os, "curvgate check", cfg);
  if (run.C > 0.0) write_metric(os, cfg, run.C, run.search);
  os << "eps_hypothesis: " << format_double(run.eps_hypothesis) << "\n";
  os << "tolerances: algebraic " << short_double(cfg.tol_algebraic) << ", stencil "
     << short_double(cfg.tol_stencil) << "\n\n";
  for (const auto& r : run.reports) {
    os << r.id << ": " << to_string(r.verdict) << (r.strict ? " (strict)" : "");
    const auto it = cfg.expect.find(r.id);
    if (it != cfg.expect.end()) os << ", expected " << to_string(it->second);
    os << "\n  ref: " << r.paper_ref << "\n";
    os << "  samples " << r.entries.size() << ", tol " << short_double(r.tol) << "\n";
    if (r.worst >= 0) {
      const auto& w = r.entries[r.worst];
      os << "  worst margin " << format_double(r.worst_margin) << " at sample " << w.sample_index << " (chart "
         << w.chart << ", lhs " << format_double(w.lhs) << ", rhs " << format_double(w.rhs) << ")\n";
    }
    for (const auto& [k, v] : r.extras) os << "  " << k << " = " << format_double(v) << "\n";
    if (!r.note.empty()) os << "  note: " << r.note << "\n";
  }
  os << "\n";
  if (run.failures.empty()) {
    os << "result: all verdicts as expected\n";
  } else {
    os << "result: " << run.failures.size() << " unexpected verdict(s)\n";
    for (const auto& f : run.failures) os << "  " << f << "\n";
  }
}

void write_scan_csv(std::ostream& os, const ScanRun& run) {
  os << "radius,samples,min_sectional,max_sectional,worst_sample\r\n";
  for (const auto& r : run.rows)
    os << format_double(r.radius) << ',' << r.samples << ',' << format_double(r.min_sectional) << ','
       << format_double(r.max_sectional) << ',' << r.worst_sample << "\r\n";
}

void write_scan_summary(std::ostream& os, const RunConfig& cfg, const ScanRun& run) {
  write_header(os, "curvgate scan", cfg);
  write_metric(os, cfg, run.C, run.search);
  os << "\n";
  for (const auto& r : run.rows)
    os << "r " << short_double(r.radius) << ": min " << format_double(r.min_sectional) << ", max "
       << format_double(r.max_sectional) << " over " << r.samples << " planes\n";
}

int run_check_command(const RunConfig& cfg, std::ostream& log) {
  const auto dir = output_dir(cfg);
  const CheckRun run = run_checks(cfg);
  write_file(dir / "report.csv", [&](std::ostream& os) { write_report_csv(os, run.reports); });
  write_file(dir / "summary.txt", [&](std::ostream& os) { write_summary(os, cfg, run); });
  for (const auto& r : run.reports) log << r.id << " " << to_string(r.verdict) << " " << format_double(r.worst_margin) << "\n";
  for (const auto& f : run.failures) log << "unexpected: " << f << "\n";
  return run.failures.empty() ? 0 : 1;
}

int run_scan_command(const RunConfig& cfg, std::ostream& log) {
  const auto dir = output_dir(cfg);
  const ScanRun run = run_scan(cfg);
  write_file(dir / "scan.csv", [&](std::ostream& os) { write_scan_csv(os, run); });
  write_file(dir / "scan_summary.txt", [&](std::ostream& os) { write_scan_summary(os, cfg, run); });
  double lo = 0.0;
  for (const auto& r : run.rows) {
    log << "r " << short_double(r.radius) << " min " << format_double(r.min_sectional) << " max "
        << format_double(r.max_sectional) << "\n";
    lo = std::min(lo, r.min_sectional);
  }
  const auto it = cfg.expect.find("scan");
  if (it == cfg.expect.end()) return 0;
  Verdict got = lo < -cfg.tol_algebraic ? Verdict::Violated : Verdict::Holds;
  if (got == Verdict::Holds && std::all_of(run.rows.begin(), run.rows.end(), [&](const ScanRow& r) {
        return r.min_sectional > cfg.tol_algebraic;
      }))
    got = Verdict::HoldsStrictly;
  if (matches(it->second, got)) return 0;
  log << "unexpected: scan expected " << to_string(it->second) << ", got " << to_string(got) << "\n";
  return 1;
}

}  // namespace curvgate
