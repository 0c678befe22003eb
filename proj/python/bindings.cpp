#include "gmmimm/consistency.hpp"
#include "gmmimm/errors.hpp"
#include "gmmimm/filter.hpp"
#include "gmmimm/gmm.hpp"
#include "gmmimm/imm.hpp"
#include "gmmimm/synth.hpp"
#include "gmmimm/sysid.hpp"
#include "gmmimm/trajectory.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace gmmimm;

namespace {

LinearFit fit_linear_py(const std::vector<double> &x, const std::vector<double> &u_left,
                        const std::vector<double> &u_right, const std::vector<double> &x_next) {
  if (u_left.size() != x.size() || u_right.size() != x.size())
    throw ParameterError("fit_linear: sequences must have equal length");
  std::vector<WheelInput> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    u[i] = {u_left[i], u_right[i]};
  return fit_linear(x, u, x_next);
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "GMM-clustered local linear models and an IMM Kalman filter bank";

  auto base = py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  (void)base;

  py::class_<WheelInput>(m, "WheelInput")
      .def(py::init<>())
      .def(py::init([](double l, double r) { return WheelInput{l, r}; }), py::arg("left"),
           py::arg("right"))
      .def_readwrite("left", &WheelInput::left)
      .def_readwrite("right", &WheelInput::right);

  py::class_<TrajectorySample>(m, "TrajectorySample")
      .def(py::init<>())
      .def(py::init([](double x, WheelInput u, double x_next) { return TrajectorySample{x, u, x_next}; }),
           py::arg("x"), py::arg("u"), py::arg("x_next"))
      .def_readwrite("x", &TrajectorySample::x)
      .def_readwrite("u", &TrajectorySample::u)
      .def_readwrite("x_next", &TrajectorySample::x_next);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init<>())
      .def_readwrite("run_id", &Trajectory::run_id)
      .def_readwrite("dt", &Trajectory::dt)
      .def_readwrite("samples", &Trajectory::samples)
      .def("__len__", [](const Trajectory &t) { return t.samples.size(); });

  m.def("trajectory_from_rows",
        [](std::string run_id, const std::vector<double> &t, const std::vector<double> &omega,
           const std::vector<double> &left, const std::vector<double> &right) {
          return trajectory_from_rows(std::move(run_id), t, omega, left, right);
        },
        py::arg("run_id"), py::arg("time_s"), py::arg("omega"), py::arg("wheel_left"),
        py::arg("wheel_right"));
  m.def("load_trajectories", &load_trajectories, py::arg("path"));
  m.def("trajectory_to_csv", &trajectory_to_csv);
  m.def("window_count",
        [](const Trajectory &t, std::size_t w, std::size_t stride) {
          return sliding_windows(t, w, stride).size();
        },
        py::arg("trajectory"), py::arg("window"), py::arg("stride") = 1);

  py::class_<LinearModel>(m, "LinearModel")
      .def(py::init<>())
      .def(py::init([](double a, double b1, double b2, double q, double r) {
             LinearModel lm{a, b1, b2, q, r};
             lm.validate();
             return lm;
           }),
           py::arg("a"), py::arg("b1"), py::arg("b2"), py::arg("q") = kDefaultProcessNoise,
           py::arg("r") = kDefaultMeasurementNoise)
      .def_readwrite("a", &LinearModel::a)
      .def_readwrite("b1", &LinearModel::b1)
      .def_readwrite("b2", &LinearModel::b2)
      .def_readwrite("q", &LinearModel::q)
      .def_readwrite("r", &LinearModel::r)
      .def("__repr__", [](const LinearModel &lm) {
        return "LinearModel(a=" + std::to_string(lm.a) + ", b1=" + std::to_string(lm.b1) +
               ", b2=" + std::to_string(lm.b2) + ")";
      });

  py::class_<LinearFit>(m, "LinearFit")
      .def_readonly("coefficients", &LinearFit::coefficients)
      .def_readonly("rank", &LinearFit::rank)
      .def_readonly("degenerate", &LinearFit::degenerate);

  py::class_<ModelPoint>(m, "ModelPoint")
      .def_readonly("s", &ModelPoint::s)
      .def_readonly("run_id", &ModelPoint::run_id)
      .def_readonly("start_index", &ModelPoint::start_index);

  py::class_<ModelCloud>(m, "ModelCloud")
      .def_readonly("points", &ModelCloud::points)
      .def_readonly("window", &ModelCloud::window)
      .def_readonly("stride", &ModelCloud::stride)
      .def_readonly("degenerate_windows", &ModelCloud::degenerate_windows)
      .def("__len__", [](const ModelCloud &c) { return c.points.size(); });

  m.def("fit_linear", &fit_linear_py, py::arg("x"), py::arg("u_left"), py::arg("u_right"),
        py::arg("x_next"));
  m.def("fit_global",
        [](const std::vector<Trajectory> &d, double q, double r) { return fit_global(d, q, r); },
        py::arg("dataset"), py::arg("q") = kDefaultProcessNoise,
        py::arg("r") = kDefaultMeasurementNoise);
  m.def("fit_local_models",
        [](const std::vector<Trajectory> &d, std::size_t w, std::size_t stride) {
          return fit_local_models(d, w, stride);
        },
        py::arg("dataset"), py::arg("window") = kDefaultWindow, py::arg("stride") = 1);

  py::enum_<InitMode>(m, "InitMode")
      .value("KMEANS_PLUS_PLUS", InitMode::KMeansPlusPlus)
      .value("RANDOM", InitMode::Random);

  py::class_<GmmParams>(m, "GmmParams")
      .def(py::init<>())
      .def(py::init([](std::vector<double> w, std::vector<Point3> mu, std::vector<Point3> var) {
             GmmParams p{std::move(w), std::move(mu), std::move(var)};
             p.validate();
             return p;
           }),
           py::arg("weights"), py::arg("means"), py::arg("variances"))
      .def_readwrite("weights", &GmmParams::weights)
      .def_readwrite("means", &GmmParams::means)
      .def_readwrite("variances", &GmmParams::variances)
      .def_property_readonly("components", &GmmParams::components);

  py::class_<EmTrace>(m, "EmTrace")
      .def_readonly("iterations", &EmTrace::iterations)
      .def_readonly("log_likelihoods", &EmTrace::log_likelihoods)
      .def_readonly("converged", &EmTrace::converged)
      .def_readonly("rescued_iterations", &EmTrace::rescued_iterations);

  py::class_<GmmFit>(m, "GmmFit")
      .def_readonly("params", &GmmFit::params)
      .def_readonly("trace", &GmmFit::trace)
      .def_readonly("seed", &GmmFit::seed)
      .def_readonly("final_log_likelihood", &GmmFit::final_log_likelihood);

  m.def("responsibilities", &responsibilities, py::arg("params"), py::arg("point"));
  m.def("em_step",
        [](const GmmParams &p, const std::vector<Point3> &pts) {
          auto step = em_step(p, pts);
          return py::make_tuple(step.params, step.log_likelihood);
        },
        py::arg("params"), py::arg("points"));
  m.def("gmm_fit",
        [](const std::vector<Point3> &pts, std::size_t components, std::uint64_t seed,
           std::size_t max_iter, double tol, InitMode init) {
          return gmm_fit(pts, GmmOptions{components, seed, max_iter, tol, init});
        },
        py::arg("points"), py::arg("components"), py::arg("seed") = 0, py::arg("max_iter") = 500,
        py::arg("tol") = 1e-6, py::arg("init") = InitMode::KMeansPlusPlus);
  m.def("cloud_points", &cloud_points);
  m.def("extract_models", &extract_models, py::arg("params"),
        py::arg("q") = kDefaultProcessNoise, py::arg("r") = kDefaultMeasurementNoise);

  py::class_<FilterState>(m, "FilterState")
      .def(py::init([](double x, double p) { return FilterState{x, p}; }), py::arg("x"),
           py::arg("p"))
      .def_readwrite("x", &FilterState::x)
      .def_readwrite("p", &FilterState::p);

  py::class_<UpdateOutcome>(m, "UpdateOutcome")
      .def(py::init([](FilterState s, double y, double S) { return UpdateOutcome{s, y, S}; }),
           py::arg("state"), py::arg("innovation"), py::arg("innovation_var"))
      .def_readonly("state", &UpdateOutcome::state)
      .def_readonly("innovation", &UpdateOutcome::innovation)
      .def_readonly("innovation_var", &UpdateOutcome::innovation_var);

  m.def("kf_predict", &kf_predict, py::arg("state"), py::arg("model"), py::arg("u"));
  m.def("kf_update", &kf_update, py::arg("prior"), py::arg("z"), py::arg("r"));

  py::enum_<WeightPrior>(m, "WeightPrior")
      .value("PREDICTED", WeightPrior::Predicted)
      .value("PREVIOUS", WeightPrior::Previous);

  py::class_<TransitionMatrix>(m, "TransitionMatrix")
      .def(py::init<std::size_t, std::vector<double>>(), py::arg("size"), py::arg("values"))
      .def_static("sticky", &TransitionMatrix::sticky, py::arg("size"), py::arg("diag") = 0.95)
      .def_property_readonly("size", &TransitionMatrix::size)
      .def_property_readonly("values", &TransitionMatrix::values);

  py::class_<ImmBank>(m, "ImmBank")
      .def_readonly("models", &ImmBank::models)
      .def_readonly("states", &ImmBank::states)
      .def_readonly("weights", &ImmBank::weights)
      .def_readonly("transition", &ImmBank::transition);
  m.def("make_bank", &make_bank, py::arg("models"), py::arg("initial"), py::arg("transition"));

  py::class_<Innovation>(m, "Innovation")
      .def_readonly("y", &Innovation::y)
      .def_readonly("s", &Innovation::s)
      .def("nis", &Innovation::nis);

  py::class_<ImmStepOutput>(m, "ImmStepOutput")
      .def_readonly("combined", &ImmStepOutput::combined)
      .def_readonly("weights", &ImmStepOutput::weights)
      .def_readonly("per_model", &ImmStepOutput::per_model)
      .def_readonly("dominant", &ImmStepOutput::dominant)
      .def_readonly("dominant_index", &ImmStepOutput::dominant_index)
      .def_readonly("mixture", &ImmStepOutput::mixture)
      .def_readonly("likelihood_underflow", &ImmStepOutput::likelihood_underflow)
      .def_readonly("mixing_fallback", &ImmStepOutput::mixing_fallback);

  m.def("imm_mix",
        [](const ImmBank &bank) {
          auto mix = imm_mix(bank);
          return py::make_tuple(mix.mixed, mix.predicted_weights);
        });
  m.def("model_likelihood", &model_likelihood);
  m.def("imm_step",
        [](const ImmBank &bank, WheelInput u, double z, WeightPrior prior) {
          ImmOptions options;
          options.weight_prior = prior;
          auto step = imm_step(bank, u, z, options);
          return py::make_tuple(step.bank, step.output);
        },
        py::arg("bank"), py::arg("u"), py::arg("z"), py::arg("weight_prior") = WeightPrior::Predicted);
  m.def("run_imm",
        [](const std::vector<LinearModel> &models, const Trajectory &traj, double tr_diag,
           double p0, WeightPrior prior) {
          ImmRunConfig config;
          config.tr_diag = tr_diag;
          config.p0 = p0;
          config.options.weight_prior = prior;
          return run_imm(models, traj, config);
        },
        py::arg("models"), py::arg("trajectory"), py::arg("tr_diag") = 0.95,
        py::arg("p0") = kDefaultInitialVariance, py::arg("weight_prior") = WeightPrior::Predicted);

  py::class_<KfStepOutput>(m, "KfStepOutput")
      .def_readonly("state", &KfStepOutput::state)
      .def_readonly("innovation", &KfStepOutput::innovation);
  m.def("run_kf",
        [](const LinearModel &model, const Trajectory &traj, double p0) {
          return run_kf(model, traj, InitialStateMode::FirstMeasurement, p0);
        },
        py::arg("model"), py::arg("trajectory"), py::arg("p0") = kDefaultInitialVariance);

  py::enum_<DatasetTag>(m, "DatasetTag")
      .value("SEEN", DatasetTag::Seen)
      .value("UNSEEN", DatasetTag::Unseen);

  py::class_<NisReport>(m, "NisReport")
      .def_readonly("mean_nis", &NisReport::mean_nis)
      .def_readonly("lower_bound", &NisReport::lower_bound)
      .def_readonly("upper_bound", &NisReport::upper_bound)
      .def_readonly("count_over", &NisReport::count_over)
      .def_readonly("count_under", &NisReport::count_under)
      .def_readonly("fraction_over", &NisReport::fraction_over)
      .def_readonly("fraction_under", &NisReport::fraction_under)
      .def_readonly("steps", &NisReport::steps)
      .def_readonly("dataset_tag", &NisReport::dataset_tag);

  m.def("nis_step", &nis_step, py::arg("y"), py::arg("s"));
  m.def("chi2_cdf", &chi2_cdf, py::arg("x"), py::arg("dof"));
  m.def("chi2_bounds", &chi2_bounds, py::arg("dof"), py::arg("tail") = kDefaultTail);
  m.def("nis_report",
        [](const std::vector<double> &values, double tail, DatasetTag tag) {
          return nis_report(NisSeries{values, 1}, tail, tag);
        },
        py::arg("values"), py::arg("tail") = kDefaultTail, py::arg("tag") = DatasetTag::Seen);

  py::enum_<DwellMode>(m, "DwellMode")
      .value("EXPONENTIAL", DwellMode::Exponential)
      .value("FIXED", DwellMode::Fixed);

  py::class_<InputProfile>(m, "InputProfile")
      .def(py::init<>())
      .def_readwrite("low", &InputProfile::low)
      .def_readwrite("high", &InputProfile::high)
      .def_readwrite("period_min", &InputProfile::period_min)
      .def_readwrite("period_max", &InputProfile::period_max);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("regimes", &SynthConfig::regimes)
      .def_readwrite("dwell", &SynthConfig::dwell)
      .def_readwrite("dwell_mode", &SynthConfig::dwell_mode)
      .def_readwrite("process_noise_std", &SynthConfig::process_noise_std)
      .def_readwrite("measurement_noise_std", &SynthConfig::measurement_noise_std)
      .def_readwrite("input", &SynthConfig::input)
      .def_readwrite("initial_state", &SynthConfig::initial_state)
      .def_readwrite("steps", &SynthConfig::steps)
      .def_readwrite("runs", &SynthConfig::runs)
      .def_readwrite("seed", &SynthConfig::seed)
      .def_readwrite("dt", &SynthConfig::dt)
      .def_readwrite("run_prefix", &SynthConfig::run_prefix);

  m.def("generate",
        [](const SynthConfig &config) {
          auto out = generate(config);
          return py::make_tuple(out.trajectories, out.labels);
        },
        py::arg("config"));
}
