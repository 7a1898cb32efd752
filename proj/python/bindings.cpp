#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cityroad/acceptance.hpp"
#include "cityroad/asymptotic.hpp"
#include "cityroad/cli.hpp"
#include "cityroad/dispersion.hpp"
#include "cityroad/front_speed.hpp"
#include "cityroad/lattice_sim.hpp"

namespace py = pybind11;
using namespace cityroad;

namespace {

Parameters make_parameters(double alpha, double beta, double d, double fprime0, double ell) {
  Parameters p;
  p.alpha = alpha;
  p.beta = beta;
  p.d = d;
  p.ell = ell;
  p.f = fprime0 > 0.0 ? Nonlinearity::logistic(fprime0) : Nonlinearity::inert();
  p.validate();
  return p;
}

// rows are snapshots, columns are cities j_min..j_max
template <typename Traj, typename Get>
py::array_t<double> stack(const Traj& traj, Get get) {
  const auto& first = traj.snapshots.front();
  const auto n = static_cast<py::ssize_t>(first.j_max - first.j_min + 1);
  py::array_t<double> out({static_cast<py::ssize_t>(traj.snapshots.size()), n});
  auto a = out.template mutable_unchecked<2>();
  for (py::ssize_t k = 0; k < a.shape(0); ++k)
    for (py::ssize_t i = 0; i < n; ++i) a(k, i) = get(traj.snapshots[static_cast<std::size_t>(k)], first.j_min + static_cast<int>(i));
  return out;
}

template <typename Traj>
py::dict trajectory_dict(const Traj& traj, double threshold) {
  py::dict d;
  std::vector<double> times;
  for (const auto& s : traj.snapshots) times.push_back(s.time);
  d["times"] = times;
  d["j_min"] = traj.snapshots.front().j_min;
  d["j_max"] = traj.snapshots.front().j_max;
  d["mass"] = traj.mass;
  d["window_contaminated"] = traj.window_contaminated;
  try {
    d["speed"] = estimate_speed(traj, threshold).fitted_speed;
  } catch (const NoCrossingError&) {
    d["speed"] = py::none();
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_cityroad, m) {
  m.doc() = "City-road lattice invasion model: spreading speeds and simulations";

  py::class_<Parameters>(m, "Parameters")
      .def(py::init(&make_parameters), py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("d") = 1.0,
           py::arg("fprime0") = 1.0, py::arg("ell") = 1.0, "fprime0 <= 0 selects the inert reaction term")
      .def_readonly("alpha", &Parameters::alpha)
      .def_readonly("beta", &Parameters::beta)
      .def_readonly("d", &Parameters::d)
      .def_readonly("ell", &Parameters::ell)
      .def_property_readonly("fprime0", [](const Parameters& p) { return p.f.fprime0(); })
      .def("__repr__", [](const Parameters& p) {
        std::ostringstream s;
        s << "Parameters(alpha=" << p.alpha << ", beta=" << p.beta << ", d=" << p.d << ", f=" << p.f.describe()
          << ", ell=" << p.ell << ")";
        return s.str();
      });

  py::class_<DispersionResult>(m, "DispersionResult")
      .def_readonly("lambda0", &DispersionResult::lambda0)
      .def_readonly("lambda_star", &DispersionResult::lambda_star)
      .def_readonly("mu_star", &DispersionResult::mu_star)
      .def_readonly("c_star", &DispersionResult::c_star)
      .def_property_readonly("local_minima", [](const DispersionResult& r) {
        std::vector<std::pair<double, double>> out;
        for (const auto& lm : r.local_minima) out.emplace_back(lm.lambda, lm.c);
        return out;
      });

  py::class_<AsymptoticSpeed>(m, "AsymptoticSpeed")
      .def_readonly("mu_star", &AsymptoticSpeed::mu_star)
      .def_readonly("c_star_inf", &AsymptoticSpeed::c_star_inf)
      .def_readonly("psi_residual", &AsymptoticSpeed::psi_residual)
      .def_readonly("dpsi_residual", &AsymptoticSpeed::dpsi_residual);

  m.def("dispersion_y", [](double lambda, const Parameters& p) { return dispersion_eval(lambda, p).y; },
        py::arg("lam"), py::arg("params"));
  m.def("find_lambda0", &find_lambda0, py::arg("params"));
  m.def("compute_c_star", &compute_c_star, py::arg("params"));
  m.def("compute_c_star_inf", &compute_c_star_inf, py::arg("params"));
  m.def("max_exchange_dt", &max_exchange_dt, py::arg("params"));

  m.def(
      "simulate",
      [](const Parameters& p, double T, double dt, int m_, int block, double c_upper, double threshold) {
        SimulationConfig cfg;
        cfg.T = T;
        cfg.dt = dt;
        cfg.m = m_;
        cfg.c_upper_guess = c_upper > 0.0 ? c_upper : 1.5 * compute_c_star(p).c_star;
        Trajectory traj;
        {
          py::gil_scoped_release release;
          traj = simulate(InitialData::left_block(block), cfg, p);
        }
        auto d = trajectory_dict(traj, threshold);
        d["rho"] = stack(traj, [](const LatticeState& s, int j) { return s.rho_at(j); });
        return d;
      },
      py::arg("params"), py::arg("T") = 50.0, py::arg("dt") = 1e-3, py::arg("m") = 32, py::arg("block") = 20,
      py::arg("c_upper") = 0.0, py::arg("threshold") = 0.5,
      "Full system from left-block data; returns times, rho (snapshot x city), mass and the fitted speed.");

  m.def(
      "simulate_asymptotic",
      [](const Parameters& p, double T, double dt, int block, double c_upper, double threshold) {
        SimulationConfig window;
        window.T = T;
        window.m = 2;
        window.c_upper_guess = c_upper > 0.0 ? c_upper : 1.5 * compute_c_star_inf(p).c_star_inf;
        const auto start = asymptotic_from_lattice(init_state(InitialData::left_block(block), window, p).state);
        AsymptoticConfig cfg;
        cfg.T = T;
        cfg.dt = dt;
        AsymptoticTrajectory traj;
        {
          py::gil_scoped_release release;
          traj = simulate_asymptotic(start, cfg, p);
        }
        auto d = trajectory_dict(traj, threshold);
        d["P"] = stack(traj, [](const AsymptoticState& s, int j) { return s.P_at(j); });
        return d;
      },
      py::arg("params"), py::arg("T") = 60.0, py::arg("dt") = 0.01, py::arg("block") = 20, py::arg("c_upper") = 0.0,
      py::arg("threshold") = 0.5);

  m.def(
      "run_criterion",
      [](int id) {
        CriterionResult r;
        {
          py::gil_scoped_release release;
          r = run_criterion(id);
        }
        return py::make_tuple(r.passed, format_result(r));
      },
      py::arg("id"), "Runs one acceptance criterion; returns (passed, report line).");

  m.def(
      "run_command",
      [](const std::string& command, const std::string& config_text, const std::vector<std::string>& overrides) {
        auto cfg = parse_config_text(config_text);
        for (const auto& o : overrides) {
          const auto eq = o.find('=');
          if (eq == std::string::npos) throw ConfigError("override expects key=value: " + o);
          set_key(cfg, o.substr(0, eq), o.substr(eq + 1));
        }
        cfg.validate();
        std::ostringstream out;
        const int status = run_command(command, cfg, out);
        return py::make_tuple(status, out.str());
      },
      py::arg("command"), py::arg("config_text") = "", py::arg("overrides") = std::vector<std::string>{});

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_RuntimeError);
}
