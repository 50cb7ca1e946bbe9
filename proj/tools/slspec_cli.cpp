// Command-line front end: eig, mfun, spectral, expand, classify, verify-example.
// Exit codes: 0 ok, 1 acceptance failure, 2 usage or configuration error,
// 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "slspec/example_suite.hpp"
#include "slspec/slspec.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace slspec;

namespace {

struct Globals {
  std::string config_path;
  std::string out_dir = "slspec_out";
  double ode_tol = 0;  // 0: keep the configured value
  double quad_tol = 0;
  int threads = 1;
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError(std::string(what) + " must be 'lo,hi'");
  return {parse_number(text.substr(0, comma)), parse_number(text.substr(comma + 1))};
}

cplx parse_lambda(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return parse_number(text);
  return {parse_number(text.substr(0, comma)), parse_number(text.substr(comma + 1))};
}

class Run {
 public:
  Run(const Globals& g, std::string command) : g_(g), command_(std::move(command)) {
    set_thread_count(g.threads);
    if (!g.config_path.empty()) config_text_ = read_file(g.config_path);
  }

  SLProblem problem() const {
    if (config_text_.empty()) throw ConfigError("--config is required for this command");
    auto pb = load_problem(config_text_);
    QuadConfig q = pb.quad();
    if (g_.ode_tol > 0) q.ode_tol = g_.ode_tol;
    if (g_.quad_tol > 0) {
      q.rel_tol = g_.quad_tol;
      q.abs_tol = 1e-2 * g_.quad_tol;
    }
    q.validate();
    return pb.with_quad(q);
  }

  BoundaryParam tau(const std::string& flag) const {
    std::string text = flag;
    if (text.empty() && !config_text_.empty()) text = load_tau_text(config_text_).value_or("");
    if (text.empty()) throw ConfigError("no boundary parameter: pass --tau or set [boundary] tau");
    auto t = parse_tau(text);
    const auto rep = check_nevanlinna(t, 64, 1e-10);
    if (!rep.ok) throw ConfigError("boundary parameter '" + text + "' is not a Nevanlinna function");
    return t;
  }

  /// Opens out/name for writing and records it in the manifest.
  std::ofstream open(const std::string& name) {
    fs::create_directories(g_.out_dir);
    const auto path = fs::path(g_.out_dir) / name;
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    outputs_.push_back(path.string());
    return f;
  }

  void write_json(const std::string& name, const json& doc) { open(name) << doc.dump(2) << "\n"; }

  /// FNV-1a over the config text and the canonical argument list.
  std::string config_hash(const std::vector<std::string>& args) const {
    std::uint64_t h = 1469598103934665603ull;
    detail::hash_mix(h, config_text_.data(), config_text_.size());
    for (const auto& a : args) {
      detail::hash_mix(h, a.data(), a.size());
      detail::hash_mix(h, "\0", 1);
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  void finish(const std::vector<std::string>& args) {
    fs::create_directories(g_.out_dir);
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json m;
    m["command"] = command_;
    m["config_hash"] = config_hash(args);
    m["tool_version"] = kVersion;
    m["timestamp"] = stamp;
    m["outputs"] = outputs_;
    std::ofstream(fs::path(g_.out_dir) / "manifest.json") << m.dump(2) << "\n";
  }

 private:
  const Globals& g_;
  std::string command_;
  std::string config_text_;
  std::vector<std::string> outputs_;
};

// ---- subcommands -----------------------------------------------------------

int cmd_eig(Run& run, const std::string& tau_flag, double lo, double hi, int max_count) {
  const auto pb = run.problem();
  const auto tau = run.tau(tau_flag);
  const auto eig = find_eigenvalues(pb, tau, lo, hi, max_count);
  auto f = run.open("eigenvalues.csv");
  f << "k,lambda\n";
  std::printf("k,lambda\n");
  for (std::size_t k = 0; k < eig.size(); ++k) {
    f << k + 1 << "," << num(eig[k]) << "\n";
    std::printf("%zu,%s\n", k + 1, num(eig[k]).c_str());
  }
  return 0;
}

int cmd_mfun(Run& run, const std::string& tau_flag, const std::string& lambda_text, bool trace) {
  const auto pb = run.problem();
  const auto tau = run.tau(tau_flag);
  const cplx l = parse_lambda(lambda_text);
  const cplx m = m_function(pb, tau, l);
  std::printf("%s %c %si\n", num(m.real()).c_str(), m.imag() < 0 ? '-' : '+', num(std::abs(m.imag())).c_str());
  json doc;
  doc["tau"] = tau.name();
  doc["lambda"] = {num(l.real()), num(l.imag())};
  doc["m"] = {num(m.real()), num(m.imag())};
  run.write_json("mfun.json", doc);
  if (trace) {
    const auto traj = propagate(pb, l, phi_initial(pb));
    auto f = run.open("trace.csv");
    f << "t,re_y,im_y,re_y1,im_y1\n";
    for (const auto& n : traj.nodes())
      f << num(n.t) << "," << num(n.state.y.real()) << "," << num(n.state.y.imag()) << "," << num(n.state.y1.real())
        << "," << num(n.state.y1.imag()) << "\n";
  }
  return 0;
}

json spectral_json(const SpectralFunction& sf) {
  json doc;
  doc["ac"] = json::array();
  for (const auto& n : sf.ac) doc["ac"].push_back({num(n.u), num(n.rho)});
  doc["masses"] = json::array();
  for (const auto& m : sf.masses) doc["masses"].push_back({num(m.s), num(m.jump)});
  doc["window"] = {num(sf.s_min), num(sf.s_max)};
  return doc;
}

int cmd_spectral(Run& run, const std::string& tau_flag, const std::string& window, int nodes) {
  const auto pb = run.problem();
  const auto tau = run.tau(tau_flag);
  const auto [lo, hi] = parse_pair(window, "--window");
  const auto sf = build_spectral_function(pb, tau, lo, hi, nodes);
  run.write_json("spectral.json", spectral_json(sf));
  auto f = run.open("spectral.csv");
  f << "kind,s,value,cell_lo,cell_hi\n";
  for (const auto& n : sf.ac) f << "ac," << num(n.u) << "," << num(n.rho) << "," << num(n.lo) << "," << num(n.hi) << "\n";
  for (const auto& m : sf.masses) f << "mass," << num(m.s) << "," << num(m.jump) << ",,\n";
  std::printf("%zu masses, %zu ac nodes in [%s, %s]\n", sf.masses.size(), sf.ac.size(), num(lo).c_str(), num(hi).c_str());
  return 0;
}

/// Built-in test functions for expand, or a two-column CSV table (t,y) interpolated linearly.
RealFn target_function(const std::string& name) {
  if (name == "quartic") return [](double t) { return (1 - t * t) * (1 - t * t); };
  if (name == "one") return [](double) { return 1.0; };
  if (name == "t2") return [](double t) { return t * t; };
  if (name == "cospi") return [](double t) { return std::cos(std::numbers::pi * t); };
  if (name == "ramp2") return [](double t) { return (1 - t) * (1 - t); };
  std::ifstream in(name);
  if (!in) throw ConfigError("--y must be quartic, one, t2, cospi, ramp2 or a readable t,y table");
  std::vector<double> ts, ys;
  std::string line;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-' || line[0] == '.')) continue;
    const auto [t, y] = parse_pair(line, "table row");
    if (!ts.empty() && !(t > ts.back())) throw ConfigError("table t values must increase");
    ts.push_back(t);
    ys.push_back(y);
  }
  if (ts.size() < 2) throw ConfigError("table needs at least two rows");
  return [ts, ys](double t) {
    if (t <= ts.front()) return ys.front();
    if (t >= ts.back()) return ys.back();
    const auto i = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return (1 - w) * ys[i - 1] + w * ys[i];
  };
}

std::vector<Truncation> parse_schedule(const std::string& text, bool has_ac) {
  if (text.empty()) {
    auto s = mixed_schedule(40);
    if (!has_ac)
      for (auto& tr : s) tr.ac_lo = 0;
    return s;
  }
  std::vector<Truncation> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    std::vector<double> v;
    std::stringstream parts(item);
    std::string tok;
    while (std::getline(parts, tok, ':')) v.push_back(parse_number(tok));
    if (v.size() != 3 || v[0] < 0 || v[0] != std::floor(v[0]))
      throw ConfigError("--schedule entries are k:ac_lo:ac_hi separated by ';'");
    out.push_back({static_cast<int>(v[0]), v[1], v[2]});
  }
  return out;
}

int cmd_expand(Run& run, const std::string& tau_flag, const std::string& y_choice, const std::string& schedule_text,
               int grid_points) {
  const auto pb = run.problem();
  const auto tau = run.tau(tau_flag);
  const auto y = target_function(y_choice);
  if (grid_points < 2) throw ConfigError("--grid needs at least two points");
  const bool has_ac = !tau.nonreal_intervals(-1e6, 1e6).empty();
  const auto schedule = parse_schedule(schedule_text, has_ac);
  int k_max = 0;
  double ac_lo = 0, ac_hi = 0;
  for (const auto& tr : schedule) {
    k_max = std::max(k_max, tr.k_max);
    ac_lo = std::min(ac_lo, tr.ac_lo);
    ac_hi = std::max(ac_hi, tr.ac_hi);
  }
  // Window: from below every eigenvalue up to midway past the k_max-th one.
  const double floor = std::min(ac_lo, detail::search_floor(pb, tau));
  double s_max = std::max(ac_hi, 1.0);
  if (k_max > 0) {
    double hi = std::pow(std::numbers::pi * (k_max + 3) / detail::phase_length(pb), 2) + 10;
    std::vector<double> eig;
    for (int attempt = 0; attempt < 8; ++attempt) {
      eig = find_eigenvalues(pb, tau, floor, hi, k_max + 1);
      if (static_cast<int>(eig.size()) > k_max) break;
      hi = 2 * hi + 10;
    }
    if (static_cast<int>(eig.size()) <= k_max) throw NumericalError("could not locate enough eigenvalues");
    s_max = std::max(s_max, 0.5 * (eig[k_max - 1] + eig[k_max]));
  }
  const int nodes = std::max(16, static_cast<int>(std::lround(4 * std::sqrt(-floor))));
  const auto sf = build_spectral_function(pb, tau, floor, s_max, nodes);
  const auto yhat = fourier_transform(pb, y, sf);
  std::vector<double> grid;
  for (int i = 0; i < grid_points; ++i) grid.push_back(pb.a() + (pb.b() - pb.a()) * i / (grid_points - 1));
  const auto tables = uniform_convergence_tables(pb, sf, yhat, y, schedule, grid);

  json doc;
  doc["tau"] = tau.name();
  doc["truncations"] = json::array();
  for (std::size_t i = 0; i < tables.report.truncations.size(); ++i) {
    const auto& e = tables.report.truncations[i];
    const double defect = parseval_defect(sf, yhat, schedule[i]);
    doc["truncations"].push_back({{"description", e.description},
                                  {"sup_error", num(e.sup_error)},
                                  {"abs_bound", num(e.abs_bound)},
                                  {"parseval_defect", num(defect)}});
    auto f = run.open("expand_" + std::to_string(i + 1) + ".csv");
    f << "t,y_true,y_reconstructed,abs_error\n";
    for (std::size_t m = 0; m < grid.size(); ++m) {
      const double truth = y(grid[m]);
      const double rec = tables.reconstructed[i][m].real();
      f << num(grid[m]) << "," << num(truth) << "," << num(rec) << "," << num(std::abs(truth - rec)) << "\n";
    }
    std::printf("%-40s sup error %s\n", e.description.c_str(), num(e.sup_error).c_str());
  }
  doc["monotone_tail"] = tables.report.monotone_tail;
  run.write_json("convergence.json", doc);
  return 0;
}

int cmd_classify(Run& run, const std::string& tau_flag) {
  const auto tau = run.tau(tau_flag);
  const auto bc = classify_bc(tau);
  const auto eta = eta_relation(tau);
  json doc;
  doc["tau"] = tau.name();
  doc["class"] = bc.name();
  if (tau.kind() == BoundaryParam::Kind::Infinity) {
    doc["B"] = "inf";
  } else {
    const auto as = asymptotics(tau);
    doc["B"] = num(as.B);
    doc["moment_finite"] = as.moment_finite;
  }
  if (bc.d_tau) doc["D"] = num(*bc.d_tau);
  doc["eta"] = eta.kind == EtaRelation::Case::FullRange ? "full_range"
               : eta.kind == EtaRelation::Case::Graph   ? "graph"
                                                        : "zero";
  std::printf("%s\n", doc.dump().c_str());
  run.write_json("classify.json", doc);
  return 0;
}

int cmd_verify(Run& run, const Globals& g, int k_max) {
  SuiteOptions opt;
  if (g.ode_tol > 0) opt.ode_tol = g.ode_tol;
  opt.k_max = k_max;
  json doc = json::array();
  bool all = true;
  for (const auto& criterion : all_criteria()) {
    const auto r = criterion(opt);
    std::printf("%s\n", format_result(r).c_str());
    std::fflush(stdout);
    all = all && r.pass;
    doc.push_back({{"criterion", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
  }
  run.write_json("verify.json", doc);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral functions and eigenfunction expansions for Sturm-Liouville problems with degenerate weight"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Globals g;
  app.add_option("--config", g.config_path, "Problem configuration (INI)");
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--ode-tol", g.ode_tol, "ODE tolerance (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--quad-tol", g.quad_tol, "Quadrature relative tolerance (overrides the config)")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1, 256))->capture_default_str();

  std::string tau_flag, lambda_text = "0,1", window, y_choice = "quartic", schedule;
  double lo = 0, hi = 100;
  int max_count = 1 << 20, nodes = 64, grid = 101, k_max = 40;
  bool trace = false;

  auto* eig = app.add_subcommand("eig", "Real poles of the m-function in [lo, hi]");
  eig->add_option("--tau", tau_flag, "Boundary parameter");
  eig->add_option("--lo", lo, "Lower end of the search range")->capture_default_str();
  eig->add_option("--hi", hi, "Upper end of the search range")->capture_default_str();
  eig->add_option("--max-count", max_count, "Stop after this many eigenvalues");

  auto* mfun = app.add_subcommand("mfun", "Evaluate the m-function");
  mfun->add_option("--tau", tau_flag, "Boundary parameter");
  mfun->add_option("--lambda", lambda_text, "Spectral parameter, 're' or 're,im'")->capture_default_str();
  mfun->add_flag("--trace", trace, "Also write the phi trajectory (t, Re y, Im y, Re y1, Im y1)");

  auto* spectral = app.add_subcommand("spectral", "Spectral function on a window");
  spectral->add_option("--tau", tau_flag, "Boundary parameter");
  spectral->add_option("--window", window, "Window 'lo,hi'")->required();
  spectral->add_option("--nodes", nodes, "Absolutely continuous nodes (>= 16)")->capture_default_str();

  auto* expand = app.add_subcommand("expand", "Expansion of a function along a truncation schedule");
  expand->add_option("--tau", tau_flag, "Boundary parameter");
  expand->add_option("--y", y_choice, "quartic | one | t2 | cospi | ramp2 | path to a t,y table")->capture_default_str();
  expand->add_option("--schedule", schedule, "Truncations 'k:ac_lo:ac_hi;...' (nested)");
  expand->add_option("--grid", grid, "Number of t points")->capture_default_str();

  auto* classify = app.add_subcommand("classify", "Boundary-condition class of a boundary parameter");
  classify->add_option("--tau", tau_flag, "Boundary parameter");

  auto* verify = app.add_subcommand("verify-example", "Run the built-in acceptance suite");
  verify->add_option("--k-max", k_max, "Largest truncation of the mixed expansion")->capture_default_str();

  app.fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Run run(g, command);
    int rc = 0;
    if (command == "eig") rc = cmd_eig(run, tau_flag, lo, hi, max_count);
    else if (command == "mfun") rc = cmd_mfun(run, tau_flag, lambda_text, trace);
    else if (command == "spectral") rc = cmd_spectral(run, tau_flag, window, nodes);
    else if (command == "expand") rc = cmd_expand(run, tau_flag, y_choice, schedule, grid);
    else if (command == "classify") rc = cmd_classify(run, tau_flag);
    else rc = cmd_verify(run, g, k_max);
    run.finish(args);
    return rc;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
