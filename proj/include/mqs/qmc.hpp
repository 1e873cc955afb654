#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mqs/fock.hpp"
#include "mqs/rng.hpp"

namespace mqs {

// Continuous-observation parameters: detected atoms leave at effective
// one-atom rate W, and a run stops after nu detections.
struct ContinuousParams {
    double w_rate = 0.0;   // W > 0, inverse time units
    int nu = 0;            // detections per trajectory, >= 1
    uint64_t seed = 0;     // master seed; per-trajectory streams derive from it

    // nu must stay well below the smaller mode population (ratio < 0.1).
    void validate(const SectorSpec& sector) const;
};

// The detection channel couples only to the symmetric mode: jump operator
// sqrt(2W) b+, so a basis state n_plus jumps at rate 2 W n_plus and decays
// under the no-jump generator by exp(-W n_plus t). Valid for balanced
// coupling of the two trapped levels.
struct JumpOperator {
    double w_rate = 0.0;

    double rate(int n_plus) const { return 2.0 * w_rate * n_plus; }
    double amplitude(int n_plus) const;
    double no_jump_factor(int n_plus, double t) const;
    double total_rate(const PlusMinusState& state) const;
    // One detection: lower n_plus with sqrt(n_plus) weighting, renormalize,
    // increment n_removed.
    PlusMinusState apply(const PlusMinusState& state) const;
};

JumpOperator effective_jump_operator(const SectorSpec& sector, double w_rate);

// One stochastic measurement record.
struct TrajectoryRecord {
    uint64_t stream_seed = 0;            // derived RNG stream for this run
    std::vector<double> taus;            // waiting time before each detection
    std::vector<double> cosphi_history;  // phase expectation after each jump
    PlusMinusState final_state;

    void validate() const;
};

// Simulates nu detections from `initial` (normalized, n_removed = 0).
// Waiting times come from inverse-transform sampling of the exact survival
// probability S(t) = sum_n p(n) exp(-2 W n t), solved by bisection in
// q = exp(-2Wt) (where S is a polynomial) to relative precision 1e-10 in t.
// Raises DarkStateStall when the drawn quantile falls inside the dark-state
// weight (the wait would be infinite).
TrajectoryRecord run_trajectory(const SectorSpec& sector,
                                const ContinuousParams& params,
                                const PlusMinusState& initial,
                                uint64_t trajectory_index = 0);

// Conditional evolution for a fixed duration instead of a fixed detection
// count (jump count is whatever the record says). Used for density-matrix
// comparisons against deterministic integration.
TrajectoryRecord run_trajectory_for_time(const SectorSpec& sector,
                                         const ContinuousParams& params,
                                         const PlusMinusState& initial,
                                         double duration,
                                         uint64_t trajectory_index = 0);

// Runs trajectory indices 0, 1, 2, ... until `count` records complete,
// skipping (and counting) dark-state stalls deterministically.
struct EnsembleResult {
    std::vector<TrajectoryRecord> records;
    int n_stalled = 0;
    uint64_t n_attempted = 0;
};
EnsembleResult run_ensemble(const SectorSpec& sector,
                            const ContinuousParams& params, int count);

// Ensemble-level checks of the waiting-time law.
struct EnsembleSummary {
    // (mean waiting time, final phase expectation) per record
    std::vector<std::pair<double, double>> tau_vs_cosphi;
    // relative RMS of tau_bar against [2 W N (1 + <cos phi>)]^-1
    double rms_relative_residual = 0.0;
    double pooled_ks_stat = 0.0;   // pooled taus / own mean vs Exp(1)
    double pooled_ks_p = 0.0;
    double per_trajectory_pass_fraction = 0.0;  // KS p > 0.01 per record
    int n_records = 0;
};
EnsembleSummary ensemble_statistics(const std::vector<TrajectoryRecord>& records,
                                    const SectorSpec& sector, double w_rate);

// Two-sided KS distance of samples against the unit exponential.
double ks_statistic_exponential(std::vector<double> samples);
// Asymptotic Kolmogorov p-value with the standard finite-n correction
// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * d.
double kolmogorov_pvalue(double d, size_t n);

// One JSON object per line: {"seed":..., "taus":[...], "cosphi_history":[...]}
// after a leading metadata object line.
void write_trajectories_jsonl(const std::string& path,
                              const std::vector<TrajectoryRecord>& records,
                              const std::string& metadata_json);

}  // namespace mqs
