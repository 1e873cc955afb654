#pragma once
#include <cstdint>

#include "mqs/config.hpp"
#include "mqs/fock.hpp"

namespace mqs {

// Element-wise comparison of the trajectory-averaged density matrix against
// deterministic master-equation integration on the two-level number grid.
// Elements with nonzero sampling error are scored by |diff| / SE; elements
// the ensemble never touched (SE = 0) are checked against a zero-count
// sampling bound instead of machine precision.
struct DensityComparison {
    int n_trajectories = 0;
    int n_compared = 0;  // elements with nonzero sampling error
    int n_within_3se = 0;
    int n_within_5se = 0;
    double worst_se_ratio = 0.0;
    double max_structural_diff = 0.0;  // elements with zero sampling error

    double structural_tol() const {
        return 10.0 / (n_trajectories > 0 ? n_trajectories : 1);
    }
    // A few 3-sigma excursions among thousands of correlated elements are
    // expected; demand 99% within 3 SE and everything within 5 SE.
    bool pass() const;
};

DensityComparison compare_average_to_master_equation(const SectorSpec& sector,
                                                     double w_rate,
                                                     double duration,
                                                     int n_trajectories,
                                                     uint64_t seed);

// Executes one configured run: writes the mode's output files under
// cfg.out_dir (every file embeds the full configuration and seed) and prints
// a one-line summary. Returns 0 on success, 4 when oracle-check mode finds a
// discrepancy. Configuration problems throw ConfigError; model-domain
// violations throw subclasses of Error.
int run(const RunConfig& cfg);

}  // namespace mqs
