// Python bindings for the simulator core. Thin pass-throughs: all numerics
// stay in the C++ library; here we only translate types and exceptions.
#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mqs/coherent.hpp"
#include "mqs/collapse.hpp"
#include "mqs/config.hpp"
#include "mqs/errors.hpp"
#include "mqs/fock.hpp"
#include "mqs/histogram.hpp"
#include "mqs/interference.hpp"
#include "mqs/oracle.hpp"
#include "mqs/qmc.hpp"
#include "mqs/rng.hpp"
#include "mqs/runner.hpp"

namespace py = pybind11;
using namespace mqs;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-component condensate measurement simulator (C++ core)";

    const auto base_exc = py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError", base_exc.ptr());

    // --- Fock-space layer ---------------------------------------------------
    py::class_<SectorSpec>(m, "SectorSpec")
        .def(py::init<>())
        .def(py::init([](int n1, int n2) { return SectorSpec{n1, n2}; }),
             py::arg("n1"), py::arg("n2"))
        .def_readwrite("n1", &SectorSpec::n1)
        .def_readwrite("n2", &SectorSpec::n2)
        .def("n_tot", &SectorSpec::n_tot)
        .def("validate", &SectorSpec::validate)
        .def("__repr__", [](const SectorSpec& s) {
            return "SectorSpec(n1=" + std::to_string(s.n1) +
                   ", n2=" + std::to_string(s.n2) + ")";
        });

    py::class_<PlusMinusState>(m, "PlusMinusState")
        .def(py::init<>())
        .def_readwrite("sector", &PlusMinusState::sector)
        .def_readwrite("n_removed", &PlusMinusState::n_removed)
        .def_readwrite("amps", &PlusMinusState::amps)
        .def("n_tot", &PlusMinusState::n_tot)
        .def("eigenvalue", &PlusMinusState::eigenvalue)
        .def("norm2", &PlusMinusState::norm2)
        .def("normalize", &PlusMinusState::normalize)
        .def("validate", &PlusMinusState::validate, py::arg("tol") = 1e-10);

    py::class_<NumberBasisState>(m, "NumberBasisState")
        .def(py::init<>())
        .def_readwrite("sector", &NumberBasisState::sector)
        .def_readwrite("n_removed", &NumberBasisState::n_removed)
        .def_readwrite("amps", &NumberBasisState::amps)
        .def("n_tot", &NumberBasisState::n_tot)
        .def("norm2", &NumberBasisState::norm2)
        .def("normalize", &NumberBasisState::normalize)
        .def("validate", &NumberBasisState::validate, py::arg("tol") = 1e-10);

    m.def("cosphi_spectrum", &cosphi_spectrum, py::arg("sector"));
    m.def("number_to_plusminus", &number_to_plusminus, py::arg("state"));
    m.def("plusminus_to_number", &plusminus_to_number, py::arg("state"));
    m.def("cosphi_expectation", &cosphi_expectation, py::arg("state"));
    m.def("symmetric_pair_state", &symmetric_pair_state, py::arg("n_per_level"));
    m.def("product_state_plusminus", &product_state_plusminus, py::arg("sector"));

    // --- histograms ---------------------------------------------------------
    py::class_<CountHistogram>(m, "CountHistogram")
        .def(py::init<>())
        .def_readwrite("observable", &CountHistogram::observable)
        .def_readwrite("values", &CountHistogram::values)
        .def_readwrite("probs", &CountHistogram::probs)
        .def("total", &CountHistogram::total)
        .def("mean", &CountHistogram::mean)
        .def("variance", &CountHistogram::variance)
        .def("prob_at", &CountHistogram::prob_at, py::arg("value"));

    // --- outcoupling pulse --------------------------------------------------
    py::class_<CouplingParams>(m, "CouplingParams")
        .def(py::init<>())
        .def(py::init([](double coupling, double alpha, double time) {
                 return CouplingParams{coupling, alpha, time};
             }),
             py::arg("coupling"), py::arg("alpha"), py::arg("time"))
        .def_readwrite("coupling", &CouplingParams::coupling)
        .def_readwrite("alpha", &CouplingParams::alpha)
        .def_readwrite("time", &CouplingParams::time)
        .def("vt", &CouplingParams::vt)
        .def("mean_transferred", &CouplingParams::mean_transferred)
        .def("validate", &CouplingParams::validate);

    py::class_<JointState>(m, "JointState")
        .def_readonly("sector", &JointState::sector)
        .def_readonly("alpha", &JointState::alpha)
        .def_readonly("vt_value", &JointState::vt_value)
        .def_readonly("n0_max", &JointState::n0_max)
        .def("norm2", &JointState::norm2)
        .def("at",
             [](const JointState& st, int n_plus, int n0) {
                 return st.at(n_plus, n0);
             },
             py::arg("n_plus"), py::arg("n0"));

    py::class_<ConditionalPhaseDistribution>(m, "ConditionalPhaseDistribution")
        .def_readonly("sector", &ConditionalPhaseDistribution::sector)
        .def_readonly("n0_observed", &ConditionalPhaseDistribution::n0_observed)
        .def_readonly("support", &ConditionalPhaseDistribution::support)
        .def_readonly("phi_grid", &ConditionalPhaseDistribution::phi_grid)
        .def_readonly("phi_density", &ConditionalPhaseDistribution::phi_density);

    m.def("evolve_general_alpha", &evolve_general_alpha, py::arg("sector"),
          py::arg("params"), py::arg("n0_max") = -1);
    m.def("n0_distribution", &n0_distribution, py::arg("state"));
    m.def("project_on_n0", &project_on_n0, py::arg("state"), py::arg("n0"));
    m.def("conditional_phase_exact", &conditional_phase_exact, py::arg("state"),
          py::arg("n0"), py::arg("phi_grid_size") = 2048);
    m.def("gaussian_phase_approx", &gaussian_phase_approx, py::arg("sector"),
          py::arg("params"), py::arg("n0"), py::arg("grid"));
    m.def("total_variation_phi", &total_variation_phi, py::arg("a"), py::arg("b"));
    m.def("n0_moments", &n0_moments, py::arg("sector"), py::arg("params"));
    m.def("default_phi_grid", &default_phi_grid, py::arg("size") = 2048);

    // --- continuous observation ---------------------------------------------
    py::class_<ContinuousParams>(m, "ContinuousParams")
        .def(py::init<>())
        .def(py::init([](double w_rate, int nu, uint64_t seed) {
                 return ContinuousParams{w_rate, nu, seed};
             }),
             py::arg("w_rate"), py::arg("nu"), py::arg("seed"))
        .def_readwrite("w_rate", &ContinuousParams::w_rate)
        .def_readwrite("nu", &ContinuousParams::nu)
        .def_readwrite("seed", &ContinuousParams::seed)
        .def("validate", &ContinuousParams::validate);

    py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
        .def_readonly("stream_seed", &TrajectoryRecord::stream_seed)
        .def_readonly("taus", &TrajectoryRecord::taus)
        .def_readonly("cosphi_history", &TrajectoryRecord::cosphi_history)
        .def_readonly("final_state", &TrajectoryRecord::final_state);

    py::class_<EnsembleResult>(m, "EnsembleResult")
        .def_readonly("records", &EnsembleResult::records)
        .def_readonly("n_stalled", &EnsembleResult::n_stalled)
        .def_readonly("n_attempted", &EnsembleResult::n_attempted);

    py::class_<EnsembleSummary>(m, "EnsembleSummary")
        .def_readonly("tau_vs_cosphi", &EnsembleSummary::tau_vs_cosphi)
        .def_readonly("rms_relative_residual",
                      &EnsembleSummary::rms_relative_residual)
        .def_readonly("pooled_ks_stat", &EnsembleSummary::pooled_ks_stat)
        .def_readonly("pooled_ks_p", &EnsembleSummary::pooled_ks_p)
        .def_readonly("per_trajectory_pass_fraction",
                      &EnsembleSummary::per_trajectory_pass_fraction)
        .def_readonly("n_records", &EnsembleSummary::n_records);

    m.def("run_trajectory", &run_trajectory, py::arg("sector"), py::arg("params"),
          py::arg("initial"), py::arg("trajectory_index") = 0);
    m.def("run_trajectory_for_time", &run_trajectory_for_time, py::arg("sector"),
          py::arg("params"), py::arg("initial"), py::arg("duration"),
          py::arg("trajectory_index") = 0);
    m.def("run_ensemble", &run_ensemble, py::arg("sector"), py::arg("params"),
          py::arg("count"));
    m.def("ensemble_statistics", &ensemble_statistics, py::arg("records"),
          py::arg("sector"), py::arg("w_rate"));

    // --- interference / detection -------------------------------------------
    py::class_<DetectionModel> det(m, "DetectionModel");
    py::enum_<DetectionModel::InitialNumbers>(det, "InitialNumbers")
        .value("fixed", DetectionModel::InitialNumbers::fixed)
        .value("poissonian", DetectionModel::InitialNumbers::poissonian);
    det.def(py::init<>())
        .def_readwrite("sigma", &DetectionModel::sigma)
        .def_readwrite("initial_number_model", &DetectionModel::initial_number_model)
        .def_readwrite("mean1", &DetectionModel::mean1)
        .def_readwrite("mean2", &DetectionModel::mean2)
        .def("validate", &DetectionModel::validate);

    py::class_<FringeReport>(m, "FringeReport")
        .def_readonly("histogram", &FringeReport::histogram)
        .def_readonly("peak_positions", &FringeReport::peak_positions)
        .def_readonly("peak_spacing", &FringeReport::peak_spacing)
        .def_readonly("visibility", &FringeReport::visibility);

    m.def("final_number_distribution", &final_number_distribution,
          py::arg("final_state"));
    m.def("smear_histogram", &smear_histogram, py::arg("hist"), py::arg("sigma"));
    m.def("detect_peaks", &detect_peaks, py::arg("hist"),
          py::arg("rel_threshold") = 0.15);
    m.def("analyze_fringes", &analyze_fringes, py::arg("hist"));
    m.def("centered_difference_distribution", &centered_difference_distribution,
          py::arg("finals"), py::arg("model"));
    m.def("pooled_raw_difference", &pooled_raw_difference, py::arg("finals"));

    // --- generic collapse kernel --------------------------------------------
    auto col = m.def_submodule("collapse", "one-dimensional collapse kernel");
    py::class_<collapse::Wavefunction1D>(col, "Wavefunction1D")
        .def(py::init<>())
        .def_readwrite("grid", &collapse::Wavefunction1D::grid)
        .def_readwrite("amplitudes", &collapse::Wavefunction1D::amplitudes)
        .def("norm2", &collapse::Wavefunction1D::norm2)
        .def("normalize", &collapse::Wavefunction1D::normalize)
        .def("validate", &collapse::Wavefunction1D::validate);

    py::class_<collapse::DetectorKernel> ker(col, "DetectorKernel");
    py::enum_<collapse::DetectorKernel::Shape>(ker, "Shape")
        .value("gaussian", collapse::DetectorKernel::Shape::gaussian)
        .value("boxcar", collapse::DetectorKernel::Shape::boxcar);
    ker.def(py::init<>())
        .def(py::init([](double center, double width,
                         collapse::DetectorKernel::Shape shape) {
                 return collapse::DetectorKernel{center, width, shape};
             }),
             py::arg("center"), py::arg("width"),
             py::arg("shape") = collapse::DetectorKernel::Shape::gaussian)
        .def_readwrite("center", &collapse::DetectorKernel::center)
        .def_readwrite("width", &collapse::DetectorKernel::width)
        .def_readwrite("shape", &collapse::DetectorKernel::shape)
        .def("__call__", &collapse::DetectorKernel::operator(), py::arg("y"));

    py::class_<collapse::MeasuredFunction>(col, "MeasuredFunction")
        .def_readonly("f_vals", &collapse::MeasuredFunction::f_vals)
        .def_readonly("fprime_vals", &collapse::MeasuredFunction::fprime_vals)
        .def_static(
            "sample",
            py::overload_cast<const std::vector<double>&,
                              const std::function<double(double)>&>(
                &collapse::MeasuredFunction::sample),
            py::arg("grid"), py::arg("f"))
        .def_static(
            "sample",
            py::overload_cast<const std::vector<double>&,
                              const std::function<double(double)>&,
                              const std::function<double(double)>&>(
                &collapse::MeasuredFunction::sample),
            py::arg("grid"), py::arg("f"), py::arg("fprime"));

    col.def("collapse", &collapse::collapse, py::arg("psi_in"), py::arg("f"),
            py::arg("g"));
    col.def("two_peak_approximation", &collapse::two_peak_approximation,
            py::arg("psi_in"), py::arg("f"), py::arg("g"), py::arg("roots"));
    col.def("peaks_resolved", &collapse::peaks_resolved, py::arg("psi_out"),
            py::arg("g"), py::arg("roots"), py::arg("f"));
    col.def("l2_distance", &collapse::l2_distance, py::arg("a"), py::arg("b"));
    col.def("overlap", &collapse::overlap, py::arg("a"), py::arg("b"));

    // --- configuration and runs ---------------------------------------------
    py::enum_<RunMode>(m, "RunMode")
        .value("coherent", RunMode::coherent)
        .value("trajectories", RunMode::trajectories)
        .value("interference", RunMode::interference)
        .value("oracle_check", RunMode::oracle_check)
        .value("collapse_demo", RunMode::collapse_demo);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("mode", &RunConfig::mode)
        .def_readwrite("n1", &RunConfig::n1)
        .def_readwrite("n2", &RunConfig::n2)
        .def_readwrite("alpha", &RunConfig::alpha)
        .def_readwrite("coupling_v", &RunConfig::coupling_v)
        .def_readwrite("time_t", &RunConfig::time_t)
        .def_readwrite("rate_w", &RunConfig::rate_w)
        .def_readwrite("nu", &RunConfig::nu)
        .def_readwrite("sigma", &RunConfig::sigma)
        .def_readwrite("initial_number_model", &RunConfig::initial_number_model)
        .def_readwrite("mean1", &RunConfig::mean1)
        .def_readwrite("mean2", &RunConfig::mean2)
        .def_readwrite("target_cosphi", &RunConfig::target_cosphi)
        .def_readwrite("n0_max", &RunConfig::n0_max)
        .def_readwrite("phi_grid_size", &RunConfig::phi_grid_size)
        .def_readwrite("ensemble_size", &RunConfig::ensemble_size)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("out_dir", &RunConfig::out_dir)
        .def_readwrite("format", &RunConfig::format);

    m.def("config_from_json_text", &config_from_json_text, py::arg("text"));
    m.def("config_to_json_text", &config_to_json_text, py::arg("cfg"));
    m.def("load_config_file", &load_config_file, py::arg("path"));
    m.def("validate_config", &validate_config, py::arg("cfg"));
    m.def("apply_desk_profile", &apply_desk_profile, py::arg("cfg"));
    m.def("apply_full_profile", &apply_full_profile, py::arg("cfg"));
    m.def("run", &run, py::arg("cfg"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<DensityComparison>(m, "DensityComparison")
        .def_readonly("n_trajectories", &DensityComparison::n_trajectories)
        .def_readonly("n_compared", &DensityComparison::n_compared)
        .def_readonly("n_within_3se", &DensityComparison::n_within_3se)
        .def_readonly("n_within_5se", &DensityComparison::n_within_5se)
        .def_readonly("worst_se_ratio", &DensityComparison::worst_se_ratio)
        .def_readonly("max_structural_diff",
                      &DensityComparison::max_structural_diff)
        .def("structural_tol", &DensityComparison::structural_tol)
        .def("pass_", &DensityComparison::pass);
    m.def("compare_average_to_master_equation",
          &compare_average_to_master_equation, py::arg("sector"),
          py::arg("w_rate"), py::arg("duration"), py::arg("n_trajectories"),
          py::arg("seed"), py::call_guard<py::gil_scoped_release>());

    m.def("derive_stream_seed", &derive_stream_seed, py::arg("master"),
          py::arg("index"));
}
