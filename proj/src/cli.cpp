#include "cityroad/cli.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>

#include "cityroad/acceptance.hpp"
#include "cityroad/asymptotic.hpp"
#include "cityroad/dispersion.hpp"
#include "cityroad/front_speed.hpp"
#include "cityroad/lattice_sim.hpp"

namespace cityroad {

ConfigError::ConfigError(const std::string& msg, std::string key, int line)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, msg) : msg), key_(std::move(key)), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, text), std::string(key));
  return v;
}

int to_int(std::string_view key, std::string_view text) {
  text = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, text), std::string(key));
  return v;
}

std::vector<double> to_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty()) return out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(to_double(key, text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(fmt::format("{}: '{}' is not true or false", key, text), std::string(key));
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = [] {
    std::vector<std::pair<std::string, Setter>> t;
    auto num = [&](const char* name, auto member) {
      t.emplace_back(name, [member](ExperimentConfig& c, std::string_view k, std::string_view v) {
        member(c) = to_double(k, v);
      });
    };
    auto integer = [&](const char* name, auto member) {
      t.emplace_back(name, [member](ExperimentConfig& c, std::string_view k, std::string_view v) {
        member(c) = to_int(k, v);
      });
    };
    num("params.alpha", [](ExperimentConfig& c) -> double& { return c.params.alpha; });
    num("params.beta", [](ExperimentConfig& c) -> double& { return c.params.beta; });
    num("params.d", [](ExperimentConfig& c) -> double& { return c.params.d; });
    num("params.ell", [](ExperimentConfig& c) -> double& { return c.params.ell; });
    t.emplace_back("params.nonlinearity", [](ExperimentConfig& c, std::string_view, std::string_view v) {
      c.params.nonlinearity = std::string(trim(v));
    });
    num("params.fprime0", [](ExperimentConfig& c) -> double& { return c.params.fprime0; });
    t.emplace_back("params.f_nodes", [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.params.f_nodes = to_list(k, v);
    });
    num("sim.T", [](ExperimentConfig& c) -> double& { return c.sim.T; });
    num("sim.dt", [](ExperimentConfig& c) -> double& { return c.sim.dt; });
    integer("sim.m", [](ExperimentConfig& c) -> int& { return c.sim.m; });
    integer("sim.margin", [](ExperimentConfig& c) -> int& { return c.sim.margin; });
    integer("sim.stride", [](ExperimentConfig& c) -> int& { return c.sim.stride; });
    integer("sim.block", [](ExperimentConfig& c) -> int& { return c.sim.block; });
    num("sim.c_upper", [](ExperimentConfig& c) -> double& { return c.sim.c_upper; });
    num("sim.asymptotic_dt", [](ExperimentConfig& c) -> double& { return c.sim.asymptotic_dt; });
    t.emplace_back("sweep.param", [](ExperimentConfig& c, std::string_view, std::string_view v) {
      c.sweep.param = std::string(trim(v));
    });
    t.emplace_back("sweep.values", [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.sweep.values = to_list(k, v);
    });
    num("measure.threshold", [](ExperimentConfig& c) -> double& { return c.measure.threshold; });
    t.emplace_back("measure.window", [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      const auto w = to_list(k, v);
      if (w.size() != 2) throw ConfigError(fmt::format("{}: expected two fractions", k), std::string(k));
      c.measure.window = {w[0], w[1]};
    });
    t.emplace_back("output.dir", [](ExperimentConfig& c, std::string_view, std::string_view v) {
      c.output_dir = std::string(trim(v));
    });
    t.emplace_back("output.edges", [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.write_edges = to_bool(k, v);
    });
    return t;
  }();
  return table;
}

void check(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", key, what), key);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void set_key(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& [name, setter] : setters())
    if (name == key) return setter(cfg, key, value);
  throw ConfigError(fmt::format("unknown key '{}'", key), std::string(key));
}

void ExperimentConfig::validate() const {
  check(positive(params.alpha), "params.alpha", "must be > 0");
  check(positive(params.beta), "params.beta", "must be > 0");
  check(positive(params.d), "params.d", "must be > 0");
  check(positive(params.ell), "params.ell", "must be > 0");
  check(params.nonlinearity == "logistic" || params.nonlinearity == "tabulated" || params.nonlinearity == "inert",
        "params.nonlinearity", "must be logistic, tabulated or inert");
  if (params.nonlinearity != "inert") check(positive(params.fprime0), "params.fprime0", "must be > 0");
  if (params.nonlinearity == "tabulated") check(params.f_nodes.size() >= 3, "params.f_nodes", "needs at least 3 nodes");
  try {
    (void)parameters();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("params: {}", e.what()), "params");
  }

  check(positive(sim.T), "sim.T", "must be > 0");
  check(positive(sim.dt), "sim.dt", "must be > 0");
  check(sim.dt <= max_exchange_dt(parameters()), "sim.dt",
        fmt::format("must be <= {} for these parameters", max_exchange_dt(parameters())));
  check(sim.m >= 2, "sim.m", "must be >= 2");
  check(sim.margin >= 4, "sim.margin", "must be >= 4");
  check(sim.stride >= 0, "sim.stride", "must be >= 0");
  check(sim.block >= 1, "sim.block", "must be >= 1");
  check(std::isfinite(sim.c_upper) && sim.c_upper >= 0.0, "sim.c_upper", "must be >= 0");
  if (params.nonlinearity == "inert") check(sim.c_upper > 0.0, "sim.c_upper", "must be set when there is no growth");
  check(positive(sim.asymptotic_dt), "sim.asymptotic_dt", "must be > 0");
  check(sim.asymptotic_dt <= max_asymptotic_dt(parameters()), "sim.asymptotic_dt",
        fmt::format("must be <= {} for these parameters", max_asymptotic_dt(parameters())));

  check(sweep.param == "alpha" || sweep.param == "beta" || sweep.param == "d" || sweep.param == "fprime0",
        "sweep.param", "must be alpha, beta, d or fprime0");
  check(!sweep.values.empty(), "sweep.values", "must not be empty");
  for (double v : sweep.values) check(positive(v), "sweep.values", "every value must be > 0");

  check(measure.threshold > 0.0 && measure.threshold < 1.0, "measure.threshold", "must lie in (0, 1)");
  check(measure.window.first >= 0.0 && measure.window.first < measure.window.second && measure.window.second <= 1.0,
        "measure.window", "must satisfy 0 <= lo < hi <= 1");
  check(!output_dir.empty(), "output.dir", "must not be empty");
}

Parameters ExperimentConfig::parameters() const {
  Parameters p;
  p.alpha = params.alpha;
  p.beta = params.beta;
  p.d = params.d;
  p.ell = params.ell;
  if (params.nonlinearity == "inert")
    p.f = Nonlinearity::inert();
  else if (params.nonlinearity == "tabulated")
    p.f = Nonlinearity::tabulated(params.f_nodes, params.fprime0);
  else
    p.f = Nonlinearity::logistic(params.fprime0);
  // the solvers work on unit-length roads
  return rescale_to_unit_length(p).params;
}

namespace {

void apply_text(ExperimentConfig& cfg, std::string_view text) {
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value", {}, line_no);
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("missing key before '='", {}, line_no);
    try {
      set_key(cfg, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), e.key(), line_no);
    }
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view text) {
  ExperimentConfig cfg;
  apply_text(cfg, text);
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) { return parse_config_text(read_file(path)); }

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  // validation waits until the overrides are in; they may repair the file
  if (!path.empty()) apply_text(cfg, read_file(path));
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') cfg.output_dir = dir;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", o));
    set_key(cfg, std::string_view(o).substr(0, eq), std::string_view(o).substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

std::vector<SweepRun> expand_sweep(const ExperimentConfig& cfg) {
  std::vector<SweepRun> runs;
  for (double v : cfg.sweep.values) {
    SweepRun r{cfg.sweep.param, v, cfg};
    auto& pp = r.config.params;
    if (cfg.sweep.param == "alpha") pp.alpha = v;
    else if (cfg.sweep.param == "beta") pp.beta = v;
    else if (cfg.sweep.param == "d") pp.d = v;
    else pp.fprime0 = v;
    r.config.validate();
    runs.push_back(std::move(r));
  }
  return runs;
}

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, std::string_view header) : out_(path) {
    if (!out_) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out_ << header << '\n';
  }
  template <typename... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double x) { return format_number(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  std::ofstream out_;
};

std::filesystem::path prepare_dir(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

SimulationConfig sim_config(const ExperimentConfig& cfg, const Parameters& p) {
  SimulationConfig s;
  s.T = cfg.sim.T;
  s.dt = cfg.sim.dt;
  s.m = cfg.sim.m;
  s.window_margin = cfg.sim.margin;
  s.snapshot_stride = cfg.sim.stride;
  s.c_upper_guess = cfg.sim.c_upper > 0.0 ? cfg.sim.c_upper : 1.5 * compute_c_star(p).c_star;
  return s;
}

struct MeasuredSpeed {
  double speed = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

template <typename Traj>
MeasuredSpeed measure(const Traj& traj, const ExperimentConfig& cfg) {
  try {
    const auto fit = estimate_speed(traj, cfg.measure.threshold, cfg.measure.window);
    return {fit.fitted_speed, fit.non_ballistic ? "non-ballistic front" : ""};
  } catch (const NoCrossingError& e) {
    return {std::numeric_limits<double>::quiet_NaN(), e.what()};
  } catch (const std::invalid_argument& e) {
    return {std::numeric_limits<double>::quiet_NaN(), e.what()};
  }
}

void write_mass(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& mass) {
  CsvFile f(path, "time,mass");
  for (const auto& [t, m] : mass) f.row(t, m);
}

int cmd_speed(const ExperimentConfig& cfg, std::ostream& out) {
  const auto p = cfg.parameters();
  const auto res = compute_c_star(p);
  const auto inf = compute_c_star_inf(p);
  const auto dir = prepare_dir(cfg);
  CsvFile scan(dir / "scan.csv", "lambda,delta,y,mu,c");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& pt : res.scan) scan.row(pt.lambda, pt.delta, pt.y, pt.mu.value_or(nan), pt.c.value_or(nan));
  out << "lambda0=" << format_number(res.lambda0) << " lambda_star=" << format_number(res.lambda_star)
      << " mu_star=" << format_number(res.mu_star) << " c_star=" << format_number(res.c_star)
      << " c_star_inf=" << format_number(inf.c_star_inf) << '\n';
  if (res.local_minima.size() > 1) {
    out << "local minima of c on the scan:";
    for (const auto& m : res.local_minima) out << " (" << format_number(m.lambda) << ", " << format_number(m.c) << ")";
    out << '\n';
  }
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  const auto p = cfg.parameters();
  const auto sc = sim_config(cfg, p);
  const auto traj = simulate(InitialData::left_block(cfg.sim.block), sc, p);
  const auto dir = prepare_dir(cfg);
  {
    CsvFile rho(dir / "rho.csv", "time,j,rho");
    for (const auto& s : traj.snapshots)
      for (int j = s.j_min; j <= s.j_max; ++j) rho.row(s.time, j, s.rho_at(j));
  }
  if (cfg.write_edges) {
    CsvFile edge(dir / "edge.csv", "time,j,x,v");
    for (const auto& s : traj.snapshots)
      for (int j = s.j_min; j < s.j_max; ++j) {
        const auto& e = s.edge_at(j);
        for (int i = 0; i <= e.m(); ++i) edge.row(s.time, j, e.x(i), e[static_cast<std::size_t>(i)]);
      }
  }
  write_mass(dir / "mass.csv", traj.mass);

  const auto& fin = traj.final_state();
  out << "T=" << format_number(fin.time) << " window=[" << fin.j_min << "," << fin.j_max << "]"
      << " rho_0=" << format_number(fin.rho_at(0)) << " mass=" << format_number(traj.mass.back().second) << '\n';
  int status = 0;
  if (p.f.is_kpp()) {
    const auto ms = measure(traj, cfg);
    const double c = compute_c_star(p).c_star;
    out << "c_measured=" << format_number(ms.speed) << " c_star=" << format_number(c)
        << " rel_error=" << format_number(std::abs(ms.speed - c) / c) << (ms.note.empty() ? "" : " (" + ms.note + ")")
        << '\n';
    if (!std::isfinite(ms.speed)) status = 1;
  }
  if (traj.window_contaminated) {
    out << "window contaminated: the front reached the window edge; raise sim.c_upper\n";
    status = 1;
  }
  return status;
}

int cmd_asymptotic(const ExperimentConfig& cfg, std::ostream& out) {
  const auto p = cfg.parameters();
  SimulationConfig window = sim_config(cfg, p);
  if (cfg.sim.c_upper <= 0.0) window.c_upper_guess = 1.5 * compute_c_star_inf(p).c_star_inf;
  window.m = 2;
  const auto start = asymptotic_from_lattice(init_state(InitialData::left_block(cfg.sim.block), window, p).state);
  AsymptoticConfig ac;
  ac.T = cfg.sim.T;
  ac.dt = cfg.sim.asymptotic_dt;
  ac.snapshot_stride = cfg.sim.stride;
  const auto traj = simulate_asymptotic(start, ac, p);
  const auto dir = prepare_dir(cfg);
  {
    CsvFile f(dir / "asymptotic.csv", "time,j,V,P");
    for (const auto& s : traj.snapshots)
      for (int j = s.j_min; j <= s.j_max; ++j)
        f.row(s.time, j, j < s.j_max ? s.V_at(j) : std::numeric_limits<double>::quiet_NaN(), s.P_at(j));
  }
  write_mass(dir / "mass.csv", traj.mass);
  int status = 0;
  if (p.f.is_kpp()) {
    const auto ms = measure(traj, cfg);
    const double c = compute_c_star_inf(p).c_star_inf;
    out << "c_measured=" << format_number(ms.speed) << " c_star_inf=" << format_number(c)
        << " rel_error=" << format_number(std::abs(ms.speed - c) / c) << (ms.note.empty() ? "" : " (" + ms.note + ")")
        << '\n';
    if (!std::isfinite(ms.speed)) status = 1;
  }
  if (traj.window_contaminated) {
    out << "window contaminated: the front reached the window edge; raise sim.c_upper\n";
    status = 1;
  }
  return status;
}

struct SweepRow {
  double c_theory = 0.0;
  double c_measured = 0.0;
  bool contaminated = false;
};

SweepRow sweep_one(const SweepRun& run) {
  const auto p = run.config.parameters();
  const double c = compute_c_star(p).c_star;
  const auto traj = simulate(InitialData::left_block(run.config.sim.block), sim_config(run.config, p), p);
  return {c, measure(traj, run.config).speed, traj.window_contaminated};
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  const auto runs = expand_sweep(cfg);
  std::vector<SweepRow> rows;
  if (cfg.parallel) {
    std::vector<std::future<SweepRow>> jobs;
    for (const auto& r : runs) jobs.push_back(std::async(std::launch::async, sweep_one, std::cref(r)));
    for (auto& j : jobs) rows.push_back(j.get());
  } else {
    for (const auto& r : runs) rows.push_back(sweep_one(r));
  }
  const auto dir = prepare_dir(cfg);
  CsvFile f(dir / "sweep.csv", "param,value,c_theory,c_measured,rel_error");
  int status = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const double rel = std::abs(rows[k].c_measured - rows[k].c_theory) / rows[k].c_theory;
    f.row(runs[k].param, runs[k].value, rows[k].c_theory, rows[k].c_measured, rel);
    out << runs[k].param << "=" << format_number(runs[k].value) << " c_theory=" << format_number(rows[k].c_theory)
        << " c_measured=" << format_number(rows[k].c_measured) << " rel_error=" << format_number(rel)
        << (rows[k].contaminated ? " (window contaminated)" : "") << '\n';
    if (rows[k].contaminated || !std::isfinite(rows[k].c_measured)) status = 1;
  }
  return status;
}

int cmd_verify(std::ostream& out) {
  int failed = 0;
  run_acceptance({}, [&](const CriterionResult& r) {
    out << format_result(r) << '\n' << std::flush;
    if (!r.passed) ++failed;
  });
  out << failed << " criteria failed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int run_command(std::string_view command, const ExperimentConfig& cfg, std::ostream& out) {
  if (command == "speed") return cmd_speed(cfg, out);
  if (command == "simulate") return cmd_simulate(cfg, out);
  if (command == "asymptotic") return cmd_asymptotic(cfg, out);
  if (command == "sweep") return cmd_sweep(cfg, out);
  if (command == "verify") return cmd_verify(out);
  throw std::invalid_argument(fmt::format("unknown command '{}'", command));
}

}  // namespace cityroad
