#include "mqs/runner.hpp"

#include <json.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mqs/coherent.hpp"
#include "mqs/collapse.hpp"
#include "mqs/errors.hpp"
#include "mqs/histogram.hpp"
#include "mqs/interference.hpp"
#include "mqs/oracle.hpp"
#include "mqs/qmc.hpp"
#include "mqs/rng.hpp"

namespace mqs {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::map<std::string, std::string> provenance(const RunConfig& cfg) {
    return {{"config", config_to_json_text(cfg)},
            {"seed", std::to_string(cfg.seed)}};
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    return out;
}

void write_header(std::ofstream& out,
                  const std::map<std::string, std::string>& metadata) {
    for (const auto& [key, value] : metadata)
        out << "# " << key << ": " << value << "\n";
}

// Count histograms honour cfg.format; every other artifact has one fixed
// representation.
void write_histogram(const RunConfig& cfg, const std::string& base,
                     const CountHistogram& hist) {
    if (cfg.format == "json") {
        ordered_json j;
        j["metadata"] = ordered_json::object();
        for (const auto& [key, value] : hist.metadata) j["metadata"][key] = value;
        j["observable"] = hist.observable;
        j["values"] = hist.values;
        j["probabilities"] = hist.probs;
        auto out = open_out(out_path(cfg, base + ".json"));
        out << j.dump(2) << "\n";
    } else {
        write_histogram_csv(out_path(cfg, base + ".csv"), hist);
    }
}

int run_coherent(const RunConfig& cfg) {
    const SectorSpec sector{cfg.n1, cfg.n2};
    const CouplingParams pulse{cfg.coupling_v, cfg.alpha, cfg.time_t};
    const JointState joint = evolve_general_alpha(sector, pulse, cfg.n0_max);

    CountHistogram hist = n0_distribution(joint);
    const auto meta = provenance(cfg);
    hist.metadata.insert(meta.begin(), meta.end());
    write_histogram(cfg, "n0_distribution", hist);

    const double mean = hist.mean();
    const double var = hist.variance();
    const int n0_obs = std::max(1, static_cast<int>(std::llround(mean)));

    const ConditionalPhaseDistribution exact =
        conditional_phase_exact(joint, n0_obs, cfg.phi_grid_size);
    ConditionalPhaseDistribution gauss;
    double tv = 0.0;
    bool have_gauss = false;
    try {
        gauss = gaussian_phase_approx(sector, pulse, n0_obs, exact.phi_grid);
        tv = total_variation_phi(exact, gauss);
        have_gauss = true;
    } catch (const FormulaScopeError&) {
        // asymmetric configuration: no closed-form reference to compare with
    }

    {
        auto out = open_out(out_path(cfg, "conditional_phase.csv"));
        write_header(out, meta);
        out << "# n0_observed: " << n0_obs << "\n";
        if (have_gauss)
            out << "# total_variation_exact_vs_gaussian: " << format_double(tv)
                << "\n";
        out << (have_gauss ? "phi,exact_density,gaussian_density"
                           : "phi,exact_density")
            << "\n";
        for (size_t i = 0; i < exact.phi_grid.size(); ++i) {
            out << format_double(exact.phi_grid[i]) << ','
                << format_double(exact.phi_density[i]);
            if (have_gauss) out << ',' << format_double(gauss.phi_density[i]);
            out << "\n";
        }
    }

    std::string formula;
    try {
        const auto [fm, fv] = n0_moments(sector, pulse);
        char buf[96];
        std::snprintf(buf, sizeof buf, " formula_mean=%.6g formula_var=%.6g", fm,
                      fv);
        formula = buf;
    } catch (const FormulaScopeError&) {
    }
    std::printf("[coherent] n1=%d n2=%d mean_n0=%.6g var_n0=%.6g%s n0_obs=%d",
                cfg.n1, cfg.n2, mean, var, formula.c_str(), n0_obs);
    if (have_gauss) std::printf(" tv=%.4g", tv);
    std::printf("\n");
    return 0;
}

int run_trajectories(const RunConfig& cfg) {
    const SectorSpec sector{cfg.n1, cfg.n2};
    const ContinuousParams params{cfg.rate_w, cfg.nu, cfg.seed};
    const EnsembleResult ens = run_ensemble(sector, params, cfg.ensemble_size);
    const EnsembleSummary stats =
        ensemble_statistics(ens.records, sector, cfg.rate_w);

    ordered_json meta;
    meta["config"] = ordered_json::parse(config_to_json_text(cfg));
    meta["seed"] = cfg.seed;
    meta["n_records"] = static_cast<int>(ens.records.size());
    meta["n_stalled"] = ens.n_stalled;
    meta["n_attempted"] = ens.n_attempted;
    meta["rms_relative_residual"] = stats.rms_relative_residual;
    meta["pooled_ks_stat"] = stats.pooled_ks_stat;
    meta["pooled_ks_p"] = stats.pooled_ks_p;
    meta["per_trajectory_pass_fraction"] = stats.per_trajectory_pass_fraction;
    write_trajectories_jsonl(out_path(cfg, "trajectories.jsonl"), ens.records,
                             meta.dump());

    {
        auto out = open_out(out_path(cfg, "tau_vs_cosphi.csv"));
        auto header = provenance(cfg);
        header["n_records"] = std::to_string(ens.records.size());
        header["n_stalled"] = std::to_string(ens.n_stalled);
        header["n_attempted"] = std::to_string(ens.n_attempted);
        header["rms_relative_residual"] =
            format_double(stats.rms_relative_residual);
        header["pooled_ks_stat"] = format_double(stats.pooled_ks_stat);
        header["pooled_ks_p"] = format_double(stats.pooled_ks_p);
        header["per_trajectory_pass_fraction"] =
            format_double(stats.per_trajectory_pass_fraction);
        write_header(out, header);
        out << "tau_bar,cosphi_final\n";
        for (const auto& [tau_bar, cosphi] : stats.tau_vs_cosphi)
            out << format_double(tau_bar) << ',' << format_double(cosphi)
                << "\n";
    }

    std::printf(
        "[trajectories] records=%d stalls=%d rms_residual=%.4g "
        "pooled_ks_p=%.4g pass_fraction=%.3f\n",
        stats.n_records, ens.n_stalled, stats.rms_relative_residual,
        stats.pooled_ks_p, stats.per_trajectory_pass_fraction);
    return 0;
}

int run_interference(const RunConfig& cfg) {
    DetectionModel model;
    model.sigma = cfg.sigma;
    model.initial_number_model =
        cfg.initial_number_model == "poissonian"
            ? DetectionModel::InitialNumbers::poissonian
            : DetectionModel::InitialNumbers::fixed;
    model.mean1 = cfg.mean1 > 0 ? cfg.mean1 : cfg.n1;
    model.mean2 = cfg.mean2 > 0 ? cfg.mean2 : cfg.n2;
    model.validate();
    const bool poissonian =
        model.initial_number_model == DetectionModel::InitialNumbers::poissonian;

    const ContinuousParams params{cfg.rate_w, cfg.nu, cfg.seed};
    // Initial-number draws use their own stream so member trajectories keep
    // the plain 0..ensemble_size-1 indexing.
    Rng draw_rng(derive_stream_seed(cfg.seed, 0xD0A11CE5ULL));

    std::vector<PlusMinusState> finals;
    int n_stalled = 0;
    int n_rejected = 0;
    long n_redraws = 0;
    for (int i = 0; i < cfg.ensemble_size; ++i) {
        SectorSpec sector{cfg.n1, cfg.n2};
        if (poissonian) {
            const long floor_pop = 10L * cfg.nu;
            long attempts = 0;
            do {
                if (++attempts > 10000)
                    throw Error(
                        "interference: could not draw initial atom numbers above "
                        "10*nu = " +
                        std::to_string(floor_pop) +
                        " after 10000 attempts; raise the Poissonian means or "
                        "lower nu");
                sector.n1 = static_cast<int>(draw_rng.poisson(model.mean1));
                sector.n2 = static_cast<int>(draw_rng.poisson(model.mean2));
            } while (std::min(sector.n1, sector.n2) <= floor_pop);
            n_redraws += attempts - 1;
        }
        const PlusMinusState initial = sector.n1 == sector.n2
                                           ? symmetric_pair_state(sector.n1)
                                           : product_state_plusminus(sector);
        try {
            TrajectoryRecord rec = run_trajectory(sector, params, initial,
                                                  static_cast<uint64_t>(i));
            if (std::abs(rec.cosphi_history.back() - cfg.target_cosphi) <= 0.05)
                finals.push_back(std::move(rec.final_state));
            else
                ++n_rejected;
        } catch (const DarkStateStall&) {
            ++n_stalled;
        }
    }
    if (finals.size() < 8)
        throw Error("interference: only " + std::to_string(finals.size()) +
                    " of " + std::to_string(cfg.ensemble_size) +
                    " members fell in the conditioning window |<cos phi> - " +
                    format_double(cfg.target_cosphi) +
                    "| <= 0.05; raise ensemble_size or move target_cosphi");

    FringeReport report = centered_difference_distribution(finals, model);
    auto meta = provenance(cfg);
    meta["members_accepted"] = std::to_string(finals.size());
    meta["members_rejected_phase"] = std::to_string(n_rejected);
    meta["members_stalled"] = std::to_string(n_stalled);
    if (poissonian) meta["initial_redraws"] = std::to_string(n_redraws);
    report.histogram.metadata.insert(meta.begin(), meta.end());

    {
        auto out = open_out(out_path(cfg, "fringe_report.json"));
        out << fringe_report_json(report, report.histogram.metadata) << "\n";
    }
    write_histogram(cfg, "centered_distribution", report.histogram);
    write_map_csv(out_path(cfg, "initial_vs_final_map.csv"),
                  initial_vs_final_map(finals), meta);

    std::printf(
        "[interference] members=%zu/%d visibility=%.4f spacing=%d stalls=%d "
        "out_of_window=%d\n",
        finals.size(), cfg.ensemble_size, report.visibility,
        report.peak_spacing, n_stalled, n_rejected);
    return 0;
}

int run_collapse_demo(const RunConfig& cfg) {
    using collapse::DetectorKernel;
    using collapse::MeasuredFunction;
    using collapse::Wavefunction1D;

    // Fixed demonstration: broad Gaussian packet, f(x) = x^2 measured near 4,
    // so the conditioned state concentrates at the two roots x = +-2.
    const int n_points = 4096;
    const double x_lo = -10.0, x_hi = 10.0;
    Wavefunction1D psi;
    psi.grid.resize(n_points);
    psi.amplitudes.resize(n_points);
    const double dx = (x_hi - x_lo) / n_points;
    for (int i = 0; i < n_points; ++i) {
        const double x = x_lo + (i + 0.5) * dx;
        psi.grid[i] = x;
        psi.amplitudes[i] = std::exp(-x * x / 8.0);
    }
    psi.normalize();

    const MeasuredFunction f = MeasuredFunction::sample(
        psi.grid, [](double x) { return x * x; },
        [](double x) { return 2.0 * x; });
    const DetectorKernel g{4.0, 0.6, DetectorKernel::Shape::gaussian};
    const std::vector<double> roots{-2.0, 2.0};

    const Wavefunction1D after = collapse::collapse(psi, f, g);
    const Wavefunction1D two_peak =
        collapse::two_peak_approximation(psi, f, g, roots);
    const bool resolved = collapse::peaks_resolved(after, g, roots, f);
    const double dist = collapse::l2_distance(after, two_peak);
    const double ovl = collapse::overlap(after, two_peak);

    const auto meta = provenance(cfg);
    const auto dump_wf = [&](const std::string& name, const Wavefunction1D& w) {
        auto out = open_out(out_path(cfg, name));
        write_header(out, meta);
        out << "# outcome_center: " << format_double(g.center) << "\n";
        out << "# kernel_width: " << format_double(g.width) << "\n";
        out << "x,re_amplitude,im_amplitude\n";
        for (size_t i = 0; i < w.grid.size(); ++i)
            out << format_double(w.grid[i]) << ','
                << format_double(w.amplitudes[i].real()) << ','
                << format_double(w.amplitudes[i].imag()) << "\n";
    };
    dump_wf("collapse_before.csv", psi);
    dump_wf("collapse_after.csv", after);
    dump_wf("collapse_two_peak.csv", two_peak);

    std::printf(
        "[collapse-demo] peaks_resolved=%s l2_vs_two_peak=%.6g overlap=%.6g\n",
        resolved ? "yes" : "no", dist, ovl);
    return 0;
}

// Fidelity and n0-marginal agreement of the pulse propagator against the
// dense three-mode reference. Returns {|1 - fidelity|, max marginal diff}.
std::pair<double, double> pulse_vs_dense(const SectorSpec& sector, double alpha,
                                         double coupling, double time) {
    const CouplingParams p{coupling, alpha, time};
    const int T = sector.n_tot();
    const JointState joint = evolve_general_alpha(sector, p, T);
    const oracle::DenseState dense = oracle::dense_unitary_evolve(
        sector.n1, sector.n2, coupling * std::cos(alpha),
        coupling * std::sin(alpha), time);

    double s = 0.0;
    double max_marginal = 0.0;
    for (int n0 = 0; n0 <= T; ++n0) {
        std::vector<cplx> slice(T - n0 + 1);
        double dense_prob = 0.0;
        for (int n1p = 0; n1p + n0 <= T; ++n1p) {
            const double a =
                dense.amps[dense.space.index(n1p, T - n0 - n1p, n0)];
            slice[n1p] = a;
            dense_prob += a * a;
        }
        double joint_prob = 0.0;
        for (int np = 0; np + n0 <= T; ++np)
            joint_prob += std::norm(joint.at(np, n0));
        max_marginal = std::max(max_marginal, std::abs(dense_prob - joint_prob));
        if (dense_prob < 1e-28) continue;
        const double amp_norm = std::sqrt(dense_prob);
        for (auto& a : slice) a /= amp_norm;
        NumberBasisState num{sector, n0, std::move(slice)};
        const PlusMinusState pm = number_to_plusminus(num);
        for (int np = 0; np + n0 <= T; ++np)
            s += (std::conj(joint.at(np, n0)) * pm.amps[np]).real() * amp_norm;
    }
    return {std::abs(1.0 - s * s), max_marginal};
}

int run_oracle_check(const RunConfig& cfg) {
    ordered_json root;
    root["config"] = ordered_json::parse(config_to_json_text(cfg));
    root["seed"] = cfg.seed;
    root["checks"] = ordered_json::array();
    bool all_pass = true;
    const auto add = [&](const std::string& name, bool pass,
                         ordered_json detail) {
        ordered_json entry;
        entry["name"] = name;
        entry["pass"] = pass;
        for (auto& [key, value] : detail.items()) entry[key] = value;
        root["checks"].push_back(entry);
        all_pass = all_pass && pass;
        std::printf("  %-42s %s\n", name.c_str(), pass ? "PASS" : "FAIL");
    };

    {  // Orthonormality of sampled basis-transform rows at large size.
        const int T = 1000;
        std::vector<double> a, b;
        double worst_norm = 0.0;
        for (int m : {0, 1, 499, 500, 1000}) {
            basis_row(m, T, a);
            double n2 = 0.0;
            for (double v : a) n2 += v * v;
            worst_norm = std::max(worst_norm, std::abs(n2 - 1.0));
        }
        double worst_dot = 0.0;
        for (auto [m1, m2] :
             {std::pair{0, 2}, std::pair{499, 501}, std::pair{498, 500}}) {
            basis_row(m1, T, a);
            basis_row(m2, T, b);
            double dot = 0.0;
            for (int i = 0; i <= T; ++i) dot += a[i] * b[i];
            worst_dot = std::max(worst_dot, std::abs(dot));
        }
        add("basis_row_orthonormality", worst_norm < 1e-9 && worst_dot < 1e-9,
            {{"size", T},
             {"worst_norm_error", worst_norm},
             {"worst_cross_dot", worst_dot}});
    }

    {  // Round trip through both basis changes on a pseudo-random state.
        Rng rng(derive_stream_seed(cfg.seed, 7));
        NumberBasisState st{SectorSpec{25, 35}, 0, std::vector<cplx>(61)};
        for (auto& a : st.amps) a = {rng.uniform() - 0.5, rng.uniform() - 0.5};
        const double norm = std::sqrt(st.norm2());
        for (auto& a : st.amps) a /= norm;
        const NumberBasisState back = plusminus_to_number(number_to_plusminus(st));
        double max_err = 0.0;
        for (size_t i = 0; i < st.amps.size(); ++i)
            max_err = std::max(max_err, std::abs(st.amps[i] - back.amps[i]));
        add("basis_roundtrip", max_err < 1e-10, {{"max_error", max_err}});
    }

    {  // O(T) product-state fast path against the streamed transform.
        const SectorSpec sector{40, 23};
        const PlusMinusState fast = product_state_plusminus(sector);
        NumberBasisState num{sector, 0, std::vector<cplx>(64, 0.0)};
        num.amps[sector.n1] = 1.0;
        const PlusMinusState slow = number_to_plusminus(num);
        double max_err = 0.0;
        for (size_t i = 0; i < fast.amps.size(); ++i)
            max_err = std::max(max_err, std::abs(fast.amps[i] - slow.amps[i]));
        add("product_state_fast_path", max_err < 1e-10, {{"max_error", max_err}});
    }

    {  // Pulse propagator vs dense three-mode evolution, symmetric point.
        const auto [deficit, marginal] =
            pulse_vs_dense({3, 3}, std::atan(1.0), 1.0,
                           std::asin(std::sqrt(0.04)));
        add("pulse_vs_dense_symmetric", deficit < 1e-10 && marginal < 1e-12,
            {{"fidelity_deficit", deficit}, {"max_marginal_diff", marginal}});
    }

    {  // Same, general mixing angle and unequal populations.
        const auto [deficit, marginal] =
            pulse_vs_dense({2, 3}, 0.6, 0.8, std::asin(std::sqrt(0.05)) / 0.8);
        add("pulse_vs_dense_general", deficit < 1e-10 && marginal < 1e-12,
            {{"fidelity_deficit", deficit}, {"max_marginal_diff", marginal}});
    }

    {  // Trajectory-averaged density matrix vs master-equation integration.
        const DensityComparison cmp = compare_average_to_master_equation(
            {2, 1}, 0.25, 1.0, 4000, cfg.seed);
        add("trajectory_average_vs_master_equation", cmp.pass(),
            {{"n_trajectories", cmp.n_trajectories},
             {"n_compared", cmp.n_compared},
             {"n_within_3se", cmp.n_within_3se},
             {"n_within_5se", cmp.n_within_5se},
             {"worst_se_ratio", cmp.worst_se_ratio},
             {"max_structural_diff", cmp.max_structural_diff}});
    }

    root["pass"] = all_pass;
    {
        auto out = open_out(out_path(cfg, "oracle_check.json"));
        out << root.dump(2) << "\n";
    }
    std::printf("[oracle-check] %s (%zu checks)\n",
                all_pass ? "all checks passed" : "DISCREPANCY FOUND",
                root["checks"].size());
    return all_pass ? 0 : 4;
}

}  // namespace

bool DensityComparison::pass() const {
    if (n_compared == 0) return false;
    if (max_structural_diff > structural_tol()) return false;
    if (n_within_5se != n_compared) return false;
    return n_within_3se >= 0.99 * n_compared;
}

DensityComparison compare_average_to_master_equation(const SectorSpec& sector,
                                                     double w_rate,
                                                     double duration,
                                                     int n_trajectories,
                                                     uint64_t seed) {
    sector.validate();
    if (n_trajectories < 2) throw ConfigError("need at least 2 trajectories");
    const int T = sector.n_tot();
    const long dim = static_cast<long>(T + 1) * (T + 1);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(dim, dim);

    const ContinuousParams params{w_rate, 1, seed};
    const PlusMinusState initial = sector.n1 == sector.n2
                                       ? symmetric_pair_state(sector.n1)
                                       : product_state_plusminus(sector);
    const auto embed = [&](const PlusMinusState& state) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        const NumberBasisState num = plusminus_to_number(state);
        const int left = num.n_tot();
        for (int n1p = 0; n1p <= left; ++n1p)
            v[oracle::two_mode_index(n1p, left - n1p, T)] =
                num.amps[n1p].real();
        return v;
    };

    Eigen::MatrixXd outer(dim, dim);
    for (int i = 0; i < n_trajectories; ++i) {
        const TrajectoryRecord rec = run_trajectory_for_time(
            sector, params, initial, duration, static_cast<uint64_t>(i));
        const Eigen::VectorXd v = embed(rec.final_state);
        outer.noalias() = v * v.transpose();
        sum += outer;
        sum_sq.array() += outer.array().square();
    }

    const double m = n_trajectories;
    const Eigen::MatrixXd avg = sum / m;
    const Eigen::VectorXd v0 = embed(initial);
    const Eigen::MatrixXd ref =
        oracle::lindblad_evolve(v0 * v0.transpose(), T, T, w_rate, duration);

    DensityComparison out;
    out.n_trajectories = n_trajectories;
    for (long i = 0; i < dim; ++i) {
        for (long j = 0; j < dim; ++j) {
            const double var =
                std::max(0.0, sum_sq(i, j) / m - avg(i, j) * avg(i, j));
            const double se = std::sqrt(var / m);
            const double diff = std::abs(avg(i, j) - ref(i, j));
            if (se < 1e-14) {
                out.max_structural_diff =
                    std::max(out.max_structural_diff, diff);
                continue;
            }
            ++out.n_compared;
            const double ratio = diff / se;
            out.worst_se_ratio = std::max(out.worst_se_ratio, ratio);
            if (ratio <= 3.0) ++out.n_within_3se;
            if (ratio <= 5.0) ++out.n_within_5se;
        }
    }
    return out;
}

int run(const RunConfig& cfg) {
    const auto violations = validate_config(cfg);
    if (!violations.empty()) {
        std::string msg = "configuration invalid:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw ConfigError(msg);
    }
    try {
        fs::create_directories(cfg.out_dir);
    } catch (const fs::filesystem_error& e) {
        throw Error("cannot create output directory '" + cfg.out_dir +
                    "': " + e.what());
    }
    switch (cfg.mode) {
        case RunMode::coherent: return run_coherent(cfg);
        case RunMode::trajectories: return run_trajectories(cfg);
        case RunMode::interference: return run_interference(cfg);
        case RunMode::oracle_check: return run_oracle_check(cfg);
        case RunMode::collapse_demo: return run_collapse_demo(cfg);
    }
    throw Error("unhandled run mode");
}

}  // namespace mqs
