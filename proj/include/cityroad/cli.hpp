// Command-line front end: flat key=value configuration, run orchestration
// and CSV output.
//
// Configuration text is one `key = value` per line; `#` starts a comment.
// Keys carry a block prefix:
//
//   params.alpha  params.beta  params.d  params.ell
//   params.nonlinearity   logistic | tabulated | inert
//   params.fprime0        growth rate f'(0)
//   params.f_nodes        comma list, tabulated nodes on [0,1]
//   sim.T  sim.dt  sim.m  sim.margin  sim.stride
//   sim.block             left_block length
//   sim.c_upper           window speed bound, 0: 1.5 times the theoretical speed
//   sim.asymptotic_dt
//   sweep.param           alpha | beta | d | fprime0
//   sweep.values          comma list
//   measure.threshold
//   measure.window        two fractions of T, e.g. 0.5,1
//   output.dir
//   output.edges          true | false, write the road CSV on `simulate`
//
// CSV layouts (header row included, floats at 17 significant digits):
//   scan.csv        lambda,delta,y,mu,c
//   rho.csv         time,j,rho
//   edge.csv        time,j,x,v
//   mass.csv        time,mass
//   asymptotic.csv  time,j,V,P
//   sweep.csv       param,value,c_theory,c_measured,rel_error
#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cityroad/model.hpp"

namespace cityroad {

/// Overrides output.dir after the config file is read and before --set.
inline constexpr const char* kOutputDirEnv = "CITYROAD_OUTPUT_DIR";

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, std::string key = {}, int line = 0);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct ExperimentConfig {
  struct {
    double alpha = 1.0;
    double beta = 1.0;
    double d = 1.0;
    double ell = 1.0;
    std::string nonlinearity = "logistic";
    double fprime0 = 1.0;
    std::vector<double> f_nodes;
  } params;
  struct {
    double T = 50.0;
    double dt = 1e-3;
    int m = 32;
    int margin = 8;
    int stride = 0;
    int block = 20;
    double c_upper = 0.0;
    double asymptotic_dt = 0.01;
  } sim;
  struct {
    std::string param = "alpha";
    std::vector<double> values{0.25, 0.5, 1.0, 2.0, 4.0};
  } sweep;
  struct {
    double threshold = 0.5;
    std::pair<double, double> window{0.5, 1.0};
  } measure;
  std::string output_dir = "out";
  bool write_edges = true;
  bool parallel = false;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  Parameters parameters() const;
};

/// Keys accepted by set_key, in documentation order.
const std::vector<std::string>& config_keys();

/// Assigns one key; throws ConfigError on unknown keys or unparsable values.
void set_key(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Parses configuration text on top of the defaults and validates it.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config_file(const std::string& path);

/// File (optional), then the output-dir environment variable, then each
/// `key=value` override, then validation.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

/// One run of a sweep: the swept value and the config it produces.
struct SweepRun {
  std::string param;
  double value = 0.0;
  ExperimentConfig config;
};
std::vector<SweepRun> expand_sweep(const ExperimentConfig& cfg);

/// "%.17g" rendering used for every float written by the tool.
std::string format_number(double x);

inline const std::vector<std::string> kCommands{"speed", "simulate", "asymptotic", "sweep", "verify"};

/// Runs a command, writing CSVs under cfg.output_dir and a report to `out`.
/// Returns the process exit status: nonzero on a failed criterion, a
/// contaminated window or an unmeasurable front.
int run_command(std::string_view command, const ExperimentConfig& cfg, std::ostream& out);

}  // namespace cityroad
