// Python bindings for the dynamics, symmetry, environment, networks and
// training entry points. Vectors and matrices map to numpy arrays.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eqrl/compare.hpp"
#include "eqrl/config.hpp"
#include "eqrl/csv.hpp"
#include "eqrl/symmetry.hpp"
#include "eqrl/verify.hpp"

namespace py = pybind11;
using namespace eqrl;

namespace {

std::vector<double> reduced_vector(const ReducedState& r) {
  return {r.values.begin(), r.values.end()};
}

}  // namespace

PYBIND11_MODULE(_eqrl, m) {
  m.doc() = "S1-equivariant quadrotor reinforcement learning workbench";
  m.attr("__version__") = "0.1.0";

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalFault>(m, "NumericalFault", PyExc_ArithmeticError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

  py::enum_<AgentMode>(m, "AgentMode")
      .value("baseline", AgentMode::baseline)
      .value("equivariant", AgentMode::equivariant);
  py::enum_<Algorithm>(m, "Algorithm").value("td3", Algorithm::td3).value("sac", Algorithm::sac);
  py::enum_<DoneReason>(m, "DoneReason")
      .value("none", DoneReason::none)
      .value("position_bound", DoneReason::position_bound)
      .value("velocity_bound", DoneReason::velocity_bound)
      .value("omega_bound", DoneReason::omega_bound)
      .value("horizon", DoneReason::horizon);
  py::enum_<Fault>(m, "Fault")
      .value("none", Fault::none)
      .value("attitude_sign", Fault::attitude_sign)
      .value("theta_sign", Fault::theta_sign);

  // SO(3) helpers.
  m.def("hat", &hat, py::arg("v"));
  m.def("vee", &vee, py::arg("S"));
  m.def("rot_z", &rot_z, py::arg("theta"));
  m.def("reorthonormalize", &reorthonormalize, py::arg("R"));
  m.def("is_rotation", &is_rotation, py::arg("R"), py::arg("tol") = kRotationTolerance);

  py::class_<QuadrotorParams>(m, "QuadrotorParams")
      .def(py::init<>())
      .def_readwrite("mass", &QuadrotorParams::mass)
      .def_readwrite("inertia", &QuadrotorParams::inertia)
      .def_readwrite("gravity", &QuadrotorParams::gravity)
      .def_readwrite("arm_length", &QuadrotorParams::arm_length)
      .def_readwrite("c_tau_f", &QuadrotorParams::c_tau_f)
      .def_readwrite("thrust_max", &QuadrotorParams::thrust_max)
      .def("validate", &QuadrotorParams::validate);

  py::class_<State>(m, "State")
      .def(py::init<>())
      .def(py::init([](const Vec3& x, const Vec3& v, const Mat3& R, const Vec3& Omega) {
             return State{x, v, R, Omega};
           }),
           py::arg("x"), py::arg("v"), py::arg("R"), py::arg("Omega"))
      .def_readwrite("x", &State::x)
      .def_readwrite("v", &State::v)
      .def_readwrite("R", &State::R)
      .def_readwrite("Omega", &State::Omega)
      .def("__repr__", [](const State& s) {
        return "State(x=[" + std::to_string(s.x.x()) + ", " + std::to_string(s.x.y()) + ", " +
               std::to_string(s.x.z()) + "])";
      });

  py::class_<Action>(m, "Action")
      .def(py::init<>())
      .def(py::init([](const Eigen::Vector4d& t) { return Action{t}; }), py::arg("thrust"))
      .def_readwrite("thrust", &Action::thrust)
      .def_static("uniform", &Action::uniform);

  py::class_<Wrench>(m, "Wrench")
      .def(py::init<>())
      .def(py::init([](double f, const Vec3& M) { return Wrench{f, M}; }), py::arg("f"),
           py::arg("M"))
      .def_readwrite("f", &Wrench::f)
      .def_readwrite("M", &Wrench::M);

  m.def("mixer", &mixer, py::arg("action"), py::arg("params"));
  m.def("inverse_mixer", &inverse_mixer, py::arg("wrench"), py::arg("params"));
  m.def("rk4_step", &rk4_step, py::arg("state"), py::arg("action"), py::arg("dt"),
        py::arg("params"));

  // Symmetry.
  m.def("act_on_state",
        [](const State& s, double theta) { return act_on_state(s, GroupElement(theta)); },
        py::arg("state"), py::arg("theta"));
  m.def("representative_angle",
        [](const State& s) { return representative_angle(s).theta(); }, py::arg("state"));
  m.def("reduce_state", [](const State& s) { return reduced_vector(reduce_state(s).reduced); },
        py::arg("state"), "Orbit representative packed as 17 numbers.");

  // Environment.
  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("x_d", &EnvConfig::x_d)
      .def_readwrite("e_x_max", &EnvConfig::e_x_max)
      .def_readwrite("c_x", &EnvConfig::c_x)
      .def_readwrite("c_v", &EnvConfig::c_v)
      .def_readwrite("c_omega", &EnvConfig::c_omega)
      .def_readwrite("c_a", &EnvConfig::c_a)
      .def_readwrite("reward_scale", &EnvConfig::reward_scale)
      .def_readwrite("dt", &EnvConfig::dt)
      .def_readwrite("max_steps", &EnvConfig::max_steps)
      .def_readwrite("init_pos_half_width", &EnvConfig::init_pos_half_width)
      .def_readwrite("init_vel", &EnvConfig::init_vel)
      .def_readwrite("init_tilt", &EnvConfig::init_tilt)
      .def_readwrite("init_omega", &EnvConfig::init_omega)
      .def_readwrite("v_max", &EnvConfig::v_max)
      .def_readwrite("omega_max", &EnvConfig::omega_max)
      .def_readwrite("seed", &EnvConfig::seed)
      .def("validate", &EnvConfig::validate);

  py::class_<ActorOutput>(m, "ActorOutput")
      .def(py::init<>())
      .def(py::init([](const Eigen::Vector4d& u) { return ActorOutput{u}; }), py::arg("u"))
      .def_readwrite("u", &ActorOutput::u);

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("next_state", &StepResult::next_state)
      .def_readonly("action", &StepResult::action)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("done", &StepResult::done)
      .def_readonly("done_reason", &StepResult::done_reason)
      .def_property_readonly("terminal", &StepResult::terminal);

  m.def("thrusts_from_actor", &thrusts_from_actor, py::arg("out"), py::arg("params"));
  m.def("hover_action", &hover_action, py::arg("params"));
  m.def("reward", &reward, py::arg("state"), py::arg("action"), py::arg("prev_action"),
        py::arg("cfg"), py::arg("params"));

  py::class_<QuadrotorEnv>(m, "QuadrotorEnv")
      .def(py::init<EnvConfig, QuadrotorParams>(), py::arg("cfg") = EnvConfig{},
           py::arg("params") = QuadrotorParams{})
      .def("reset", &QuadrotorEnv::reset, py::return_value_policy::copy)
      .def("reset_to", &QuadrotorEnv::reset_to, py::arg("state"), py::return_value_policy::copy)
      .def("step", &QuadrotorEnv::step, py::arg("u"))
      .def_property_readonly("state", &QuadrotorEnv::state, py::return_value_policy::copy)
      .def_property_readonly("steps", &QuadrotorEnv::steps);

  m.def("encode", &encode, py::arg("state"), py::arg("mode"), py::arg("cfg"),
        "Network input for a state under the given mode.");

  // Networks.
  py::class_<Mlp>(m, "Mlp")
      .def_static("load", &Mlp::load_file, py::arg("path"))
      .def("save", &Mlp::save_file, py::arg("path"))
      .def("forward", py::overload_cast<const Eigen::MatrixXd&>(&Mlp::forward, py::const_),
           py::arg("inputs"), "Column-per-sample inputs to column-per-sample outputs.")
      .def_property_readonly("sizes", &Mlp::sizes)
      .def_property_readonly("num_parameters", &Mlp::num_parameters);
  m.def("make_hover_actor", &make_hover_actor, py::arg("mode"), py::arg("params"),
        py::arg("hidden") = 256);
  m.def("snapshot_mode", &snapshot_mode, py::arg("actor"));

  // Training and evaluation.
  py::class_<EvalResult>(m, "EvalResult")
      .def_readonly("episodes", &EvalResult::episodes)
      .def_readonly("mean_return", &EvalResult::mean_return)
      .def_readonly("std_return", &EvalResult::std_return)
      .def_readonly("mean_terminal_error", &EvalResult::mean_terminal_error)
      .def_readonly("position_bound_terminations", &EvalResult::position_bound_terminations)
      .def_readonly("returns", &EvalResult::returns);
  m.def(
      "evaluate_actor",
      [](const Mlp& actor, const EnvConfig& env, const QuadrotorParams& p, int episodes,
         std::uint64_t seed) {
        return evaluate(actor_policy(actor, snapshot_mode(actor), env), env, p, episodes, seed);
      },
      py::arg("actor"), py::arg("env"), py::arg("params"), py::arg("episodes"), py::arg("seed"));

  py::class_<EvalRow>(m, "EvalRow")
      .def_readonly("env_step", &EvalRow::env_step)
      .def_readonly("mean_return", &EvalRow::mean_return)
      .def_readonly("std_return", &EvalRow::std_return)
      .def_readonly("mean_terminal_error", &EvalRow::mean_terminal_error)
      .def_readonly("wall_time_s", &EvalRow::wall_time_s);
  py::class_<TrainingLog>(m, "TrainingLog")
      .def_readonly("algo", &TrainingLog::algo)
      .def_readonly("mode", &TrainingLog::mode)
      .def_readonly("seed", &TrainingLog::seed)
      .def_readonly("rows", &TrainingLog::rows);
  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("log", &TrainResult::log)
      .def_readonly("final_actor", &TrainResult::final_actor)
      .def_readonly("best_actor", &TrainResult::best_actor)
      .def_readonly("best_eval_return", &TrainResult::best_eval_return)
      .def_readonly("episodes", &TrainResult::episodes);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("algo", &RunConfig::algo)
      .def_readwrite("mode", &RunConfig::mode)
      .def_readwrite("seeds", &RunConfig::seeds)
      .def_readwrite("total_steps", &RunConfig::total_steps)
      .def_readwrite("eval_interval", &RunConfig::eval_interval)
      .def_readwrite("eval_episodes", &RunConfig::eval_episodes)
      .def_readwrite("env", &RunConfig::env)
      .def_readwrite("params", &RunConfig::params)
      .def("set", &set_config_value, py::arg("key"), py::arg("value"),
           "Applies one config-file key, e.g. cfg.set('hidden_units', '64').")
      .def("validate", &RunConfig::validate);
  m.def("load_config", &load_config, py::arg("path"));
  m.def("parse_config", &parse_config, py::arg("text"), py::arg("source") = "<string>");
  m.def("config_keys", &config_keys);

  m.def(
      "train",
      [](const RunConfig& cfg, std::uint64_t seed) {
        py::gil_scoped_release release;
        return train(cfg.train_config(seed));
      },
      py::arg("cfg"), py::arg("seed"), "Trains one agent; deterministic given cfg and seed.");
  m.def("read_training_log", &read_training_log, py::arg("path"));
  m.def("write_training_log",
        py::overload_cast<const std::string&, const TrainingLog&>(&write_training_log),
        py::arg("path"), py::arg("log"));

  py::class_<ModeSummary>(m, "ModeSummary")
      .def_readonly("steps_to_threshold", &ModeSummary::steps_to_threshold)
      .def_readonly("best_mean", &ModeSummary::best_mean)
      .def_readonly("final_mean", &ModeSummary::final_mean)
      .def_readonly("final_std", &ModeSummary::final_std);
  py::class_<ComparisonSummary>(m, "ComparisonSummary")
      .def_readonly("threshold", &ComparisonSummary::threshold)
      .def_readonly("baseline", &ComparisonSummary::baseline)
      .def_readonly("equivariant", &ComparisonSummary::equivariant)
      .def_readonly("improved", &ComparisonSummary::improved)
      .def_readonly("speedup", &ComparisonSummary::speedup)
      .def_readonly("pooled_final_std", &ComparisonSummary::pooled_final_std);
  m.def("compare_modes", &compare_modes, py::arg("baseline"), py::arg("equivariant"),
        py::arg("threshold_fraction") = 0.8);

  // Property battery.
  py::class_<PropertyResult>(m, "PropertyResult")
      .def_readonly("name", &PropertyResult::name)
      .def_readonly("observed", &PropertyResult::observed)
      .def_readonly("bound", &PropertyResult::bound)
      .def_readonly("passed", &PropertyResult::passed);
  m.def(
      "run_property_battery",
      [](std::uint64_t seed, Fault fault) {
        py::gil_scoped_release release;
        return run_property_battery(seed, fault);
      },
      py::arg("seed"), py::arg("fault") = Fault::none);
}
