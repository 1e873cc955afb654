// Self-contained acceptance gate: one line per criterion, exit 0 only if
// every executed criterion passes (exit 4 otherwise). Criteria 8 and the
// full-scale half of 7 run only with --full-scale; --only N[,M...] restricts
// the set.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

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

using namespace mqs;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    bool pass = false;
    std::string detail;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

CouplingParams working_pulse(double s2) {
    return {1.0, 0.78539816339744830961, std::asin(std::sqrt(s2))};
}

// --- criterion 1: transfer-count moments at the working point ---------------
Criterion criterion_moments() {
    const SectorSpec sector{1000, 1000};
    const CountHistogram h =
        n0_distribution(evolve_general_alpha(sector, working_pulse(0.03)));
    const double mean = h.mean();
    const double var = h.variance();
    const double quoted_mean = 30.0;
    const double quoted_var = 479.1;  // N s^2 c^2 + N^2 s^4 / 2
    const bool mean_ok = std::abs(mean - quoted_mean) <= 1e-6 * quoted_mean;
    const bool var_ok = std::abs(var - quoted_var) <= 1e-6 * quoted_var;
    Criterion c;
    c.pass = mean_ok && var_ok;
    c.detail = fmt("mean=%.9g (target 30, rel tol 1e-6), variance=%.9g vs "
                   "quoted 479.1",
                   mean, var);
    if (!var_ok)
        c.detail +=
            "; the distribution's variance exceeds the quoted constant by "
            "N sin^4(Vt)/2 = 0.45, a subleading term the quoted formula drops "
            "(the computed distribution is exact; see README)";
    return c;
}

// --- criterion 2: phase-operator spectrum ----------------------------------
Criterion criterion_spectrum() {
    double worst = 0.0;
    for (int N : {1, 2, 10}) {
        const auto spec = cosphi_spectrum({N, N});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            oracle::dense_pair_exchange_matrix(2 * N) / (2.0 * N));
        for (int i = 0; i <= 2 * N; ++i)
            worst = std::max(worst, std::abs(spec[i] - es.eigenvalues()[i]));
    }
    return {worst < 1e-12,
            fmt("max |ladder - dense eigenvalue| = %.3g over N in {1,2,10}",
                worst)};
}

// --- criterion 3: parity selection rule ------------------------------------
Criterion criterion_parity() {
    double worst = 0.0;
    for (int N : {2, 10, 100}) {
        NumberBasisState num{SectorSpec{N, N}, 0,
                             std::vector<cplx>(2 * N + 1, 0.0)};
        num.amps[N] = 1.0;
        const PlusMinusState pm = number_to_plusminus(num);
        for (int n = 1; n <= 2 * N; n += 2)
            worst = std::max(worst, std::abs(pm.amps[n]));
    }
    return {worst < 1e-14,
            fmt("max odd-occupation amplitude = %.3g over N in {2,10,100}",
                worst)};
}

// --- criterion 4: Gaussian conditional-phase approximation ------------------
Criterion criterion_gaussian() {
    const SectorSpec sector{1000, 1000};
    const CouplingParams p = working_pulse(0.03);
    const JointState joint = evolve_general_alpha(sector, p);
    double worst = 0.0, best = 1.0;
    int worst_n0 = 0;
    for (int n0 = 22; n0 <= 38; ++n0) {  // |cos phi*| = |n0/30 - 1| < 0.3
        const ConditionalPhaseDistribution exact =
            conditional_phase_exact(joint, n0, 2048);
        const ConditionalPhaseDistribution gauss =
            gaussian_phase_approx(sector, p, n0, exact.phi_grid);
        const double tv = total_variation_phi(exact, gauss);
        best = std::min(best, tv);
        if (tv > worst) {
            worst = tv;
            worst_n0 = n0;
        }
    }
    Criterion c;
    c.pass = worst < 0.05;
    c.detail = fmt("TV range [%.4f, %.4f], worst at n0 = %d (threshold 0.05, "
                   "outcomes 22..38)",
                   best, worst, worst_n0);
    if (!c.pass)
        c.detail +=
            "; the exact conditional keeps a ~0.4 residual skewness the "
            "Gaussian form cannot carry, so the distance plateaus just above "
            "the stated threshold (see README)";
    return c;
}

// --- criterion 5: waiting-time law over an ensemble -------------------------
Criterion criterion_waiting() {
    const SectorSpec sector{1000, 1000};
    const ContinuousParams params{0.00025, 30, 4242};
    const EnsembleResult ens = run_ensemble(sector, params, 200);
    const EnsembleSummary stats =
        ensemble_statistics(ens.records, sector, params.w_rate);
    const bool ok =
        stats.rms_relative_residual < 0.15 && stats.pooled_ks_p > 0.01;
    return {ok, fmt("tau-bar residual RMS = %.4f (< 0.15), pooled KS p = %.4f "
                    "(> 0.01), %d records, %d stalls",
                    stats.rms_relative_residual, stats.pooled_ks_p,
                    stats.n_records, ens.n_stalled)};
}

// --- criterion 6: trajectory average vs master equation ---------------------
Criterion criterion_lindblad() {
    // horizon chosen so a typical record has <= 2 detections
    const DensityComparison cmp =
        compare_average_to_master_equation({3, 3}, 0.05, 1.0, 100000, 31415);
    return {cmp.pass(),
            fmt("%d/%d elements within 3 SE (need >= 99%%), %d within 5 SE "
                "(need all), worst ratio %.2f, untouched-element diff %.2e "
                "(tol %.1e)",
                cmp.n_within_3se, cmp.n_compared, cmp.n_within_5se,
                cmp.worst_se_ratio, cmp.max_structural_diff,
                cmp.structural_tol())};
}

// --- criteria 7/8 share a conditioned-ensemble generator --------------------
struct Conditioned {
    std::vector<PlusMinusState> finals;
    int stalls = 0;
};

Conditioned condition_ensemble(int n1, int n2, bool poissonian, double mean,
                               int nu, double w, int candidates,
                               uint64_t seed) {
    const ContinuousParams params{w, nu, seed};
    Rng draws(derive_stream_seed(seed, 0xD0A11CE5ULL));
    Conditioned out;
    for (int i = 0; i < candidates; ++i) {
        SectorSpec sector{n1, n2};
        if (poissonian) {
            do {
                sector.n1 = static_cast<int>(draws.poisson(mean));
                sector.n2 = static_cast<int>(draws.poisson(mean));
            } while (std::min(sector.n1, sector.n2) <= 10 * nu);
        }
        const PlusMinusState initial =
            sector.n1 == sector.n2 ? symmetric_pair_state(sector.n1)
                                   : product_state_plusminus(sector);
        try {
            TrajectoryRecord rec = run_trajectory(sector, params, initial,
                                                  static_cast<uint64_t>(i));
            if (std::abs(rec.cosphi_history.back()) <= 0.05)
                out.finals.push_back(std::move(rec.final_state));
        } catch (const DarkStateStall&) {
            ++out.stalls;
        }
    }
    return out;
}

FringeReport centered_report(const std::vector<PlusMinusState>& finals,
                             double sigma, bool poissonian, double mean) {
    DetectionModel model;
    model.sigma = sigma;
    model.initial_number_model = poissonian
                                     ? DetectionModel::InitialNumbers::poissonian
                                     : DetectionModel::InitialNumbers::fixed;
    model.mean1 = model.mean2 = mean;
    return centered_difference_distribution(finals, model);
}

Criterion criterion_fringes(bool full_scale) {
    const Conditioned desk =
        condition_ensemble(100, 100, false, 100, 8, 1.0 / 400.0, 800, 9001);
    if (desk.finals.size() < 8)
        return {false, fmt("desk conditioning produced only %zu members",
                           desk.finals.size())};
    const FringeReport desk_rep = centered_report(desk.finals, 0.0, false, 100);
    std::string detail =
        fmt("desk: %zu members, spacing %d, visibility %.3f",
            desk.finals.size(), desk_rep.peak_spacing, desk_rep.visibility);
    bool ok = desk_rep.peak_spacing == 4;
    if (full_scale) {
        const Conditioned full = condition_ensemble(1000, 1000, false, 1000, 26,
                                                    0.00025, 600, 9002);
        if (full.finals.size() < 8)
            return {false, detail + fmt("; full conditioning produced only %zu "
                                        "members",
                                        full.finals.size())};
        const FringeReport full_rep =
            centered_report(full.finals, 0.0, false, 1000);
        detail += fmt("; full: %zu members, spacing %d, visibility %.3f",
                      full.finals.size(), full_rep.peak_spacing,
                      full_rep.visibility);
        ok = ok && full_rep.peak_spacing == 4;
    } else {
        detail += "; full-scale half not requested (run with --full-scale)";
    }
    return {ok, detail};
}

Criterion criterion_sigma_threshold() {
    const Conditioned ens = condition_ensemble(1000, 1000, true, 1000.0, 26,
                                               0.00025, 8000, 9003);
    if (ens.finals.size() < 8)
        return {false,
                fmt("conditioning produced only %zu members", ens.finals.size())};
    const FringeReport soft = centered_report(ens.finals, 1.0, true, 1000.0);
    const FringeReport hard = centered_report(ens.finals, 1.7, true, 1000.0);
    Criterion c;
    c.pass = soft.visibility > 0.1 && hard.visibility < 0.05;
    c.detail = fmt("%zu members; visibility %.4f at sigma=1.0 (> 0.1), %.4f "
                   "at sigma=1.7 (< 0.05)",
                   ens.finals.size(), soft.visibility, hard.visibility);
    if (hard.visibility >= 0.05)
        c.detail +=
            "; a parity-exact comb smeared at sigma=1.7 keeps ~0.06 "
            "visibility from adjacent-tooth mixing alone under the "
            "three-pair peak/trough definition (plus an envelope-curvature "
            "tilt), so the 0.05 proxy sits below the attainable floor (see "
            "README)";
    return c;
}

// --- criterion 9: collapse-kernel property suite ----------------------------
Criterion criterion_collapse() {
    namespace col = mqs::collapse;
    col::Wavefunction1D psi;
    const int n = 8192;
    psi.grid.resize(n);
    psi.amplitudes.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = -10.0 + (i + 0.5) * (20.0 / n);
        psi.grid[i] = x;
        psi.amplitudes[i] = std::exp(-x * x / 8.0);
    }
    psi.normalize();
    const col::MeasuredFunction f = col::MeasuredFunction::sample(
        psi.grid, [](double x) { return x * x; },
        [](double x) { return 2.0 * x; });
    const std::vector<double> roots{-2.0, 2.0};
    const col::DetectorKernel narrow{4.0, 0.6,
                                     col::DetectorKernel::Shape::gaussian};
    const col::DetectorKernel wide{4.0, 7.5,
                                   col::DetectorKernel::Shape::gaussian};

    const col::Wavefunction1D out = col::collapse(psi, f, narrow);
    const bool norm_ok = std::abs(out.norm2() - 1.0) < 1e-10;
    double asym = 0.0;
    for (int i = 0; i < n / 2; ++i)
        asym = std::max(asym,
                        std::abs(std::abs(out.amplitudes[i]) -
                                 std::abs(out.amplitudes[n - 1 - i])));
    double prev = 2.0;
    bool conv_ok = true;
    for (double width : {1.2, 0.6, 0.3}) {
        const col::DetectorKernel g{4.0, width,
                                    col::DetectorKernel::Shape::gaussian};
        const double d =
            col::l2_distance(col::collapse(psi, f, g),
                             col::two_peak_approximation(psi, f, g, roots));
        conv_ok = conv_ok && d < prev;
        prev = d;
    }
    conv_ok = conv_ok && prev < 0.05;
    const bool res_ok =
        col::peaks_resolved(out, narrow, roots, f) &&
        !col::peaks_resolved(col::collapse(psi, f, wide), wide, roots, f);
    const bool ok = norm_ok && asym < 1e-10 && conv_ok && res_ok;
    return {ok, fmt("norm_ok=%d mirror_asymmetry=%.2e two_peak_l2=%.4f "
                    "resolution_predicate_ok=%d",
                    norm_ok, asym, prev, res_ok)};
}

// --- criterion 10: byte-identical reruns ------------------------------------
std::map<std::string, std::string> read_dir_bytes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[entry.path().filename().string()] = ss.str();
    }
    return out;
}

Criterion criterion_determinism() {
    std::vector<RunConfig> cases;
    {
        RunConfig cfg;
        apply_desk_profile(cfg);
        cfg.mode = RunMode::coherent;
        cfg.seed = 321;
        cases.push_back(cfg);
    }
    {
        RunConfig cfg;
        apply_desk_profile(cfg);
        cfg.mode = RunMode::trajectories;
        cfg.ensemble_size = 60;
        cfg.seed = 322;
        cases.push_back(cfg);
    }
    {
        RunConfig cfg;
        apply_desk_profile(cfg);
        cfg.mode = RunMode::interference;
        cfg.ensemble_size = 800;
        cfg.seed = 9001;
        cases.push_back(cfg);
    }
    {
        RunConfig cfg;
        cfg.mode = RunMode::collapse_demo;
        cfg.seed = 323;
        cases.push_back(cfg);
    }
    // out_dir is part of the embedded provenance, so "same config + seed"
    // means the same path: run twice into it and compare the snapshots.
    int files_compared = 0;
    for (auto cfg : cases) {
        const fs::path dir = fs::path("acceptance_tmp") / to_string(cfg.mode);
        cfg.out_dir = dir.string();
        std::map<std::string, std::string> a, b;
        for (auto* snapshot : {&a, &b}) {
            fs::remove_all(dir);
            if (run(cfg) != 0)
                return {false, "run failed in mode " + to_string(cfg.mode)};
            *snapshot = read_dir_bytes(dir);
        }
        if (a.empty() || a.size() != b.size())
            return {false, "file sets differ in mode " + to_string(cfg.mode)};
        for (const auto& [name, bytes] : a) {
            const auto it = b.find(name);
            if (it == b.end() || it->second != bytes)
                return {false, "bytes differ: " + to_string(cfg.mode) + "/" +
                                   name};
            ++files_compared;
        }
    }
    fs::remove_all("acceptance_tmp");
    return {true, fmt("%d files byte-identical across reruns in 4 modes",
                      files_compared)};
}

}  // namespace

int main(int argc, char** argv) {
    bool full_scale = false;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--full-scale") {
            full_scale = true;
        } else if (arg == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
        } else {
            std::fprintf(stderr,
                         "usage: %s [--full-scale] [--only N[,M...]]\n",
                         argv[0]);
            return 2;
        }
    }

    struct Entry {
        int id;
        const char* name;
        double budget_s;  // 0 = no budget stated
        bool full_only;
        Criterion (*fn)();
    };
    static bool s_full = full_scale;
    static const auto fringe_thunk = +[]() { return criterion_fringes(s_full); };
    const std::vector<Entry> entries{
        {1, "transfer-count moments", 10, false, &criterion_moments},
        {2, "phase-operator spectrum", 1, false, &criterion_spectrum},
        {3, "parity selection rule", 0, false, &criterion_parity},
        {4, "Gaussian conditional phase", 30, false, &criterion_gaussian},
        {5, "waiting-time law", 120, false, &criterion_waiting},
        {6, "trajectory vs master equation", 300, false, &criterion_lindblad},
        {7, "fringe spacing", 120, false, fringe_thunk},
        {8, "counting-error threshold", 1800, true, &criterion_sigma_threshold},
        {9, "collapse-kernel suite", 5, false, &criterion_collapse},
        {10, "byte-identical reruns", 0, false, &criterion_determinism},
    };

    int failures = 0;
    for (const auto& entry : entries) {
        if (!only.empty() && only.count(entry.id) == 0) continue;
        if (entry.full_only && !full_scale) {
            std::printf("C%d SKIPPED (%s): full-scale only; run with "
                        "--full-scale\n",
                        entry.id, entry.name);
            continue;
        }
        const double t0 = now_seconds();
        Criterion c;
        try {
            c = entry.fn();
        } catch (const std::exception& e) {
            c = {false, std::string("exception: ") + e.what()};
        }
        const double dt = now_seconds() - t0;
        if (c.pass && entry.budget_s > 0 && dt > entry.budget_s) {
            c.pass = false;
            c.detail += fmt("; exceeded the %.0f s runtime budget", entry.budget_s);
        }
        std::printf("C%d %s (%s): %s [%.1f s]\n", entry.id,
                    c.pass ? "PASS" : "FAIL", entry.name, c.detail.c_str(), dt);
        std::fflush(stdout);
        if (!c.pass) ++failures;
    }
    if (failures > 0) {
        std::printf("ACCEPTANCE: %d criterion(s) failed\n", failures);
        return 4;
    }
    std::printf("ACCEPTANCE: all executed criteria passed\n");
    return 0;
}
