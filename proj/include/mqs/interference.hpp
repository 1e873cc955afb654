#pragma once
#include <map>
#include <string>
#include <vector>

#include "mqs/fock.hpp"
#include "mqs/histogram.hpp"

namespace mqs {

// Detection-stage model: counting error and how initial atom numbers are
// drawn when generating ensembles.
struct DetectionModel {
    enum class InitialNumbers { fixed, poissonian };

    double sigma = 0.0;  // r.m.s. atom-counting error, >= 0
    InitialNumbers initial_number_model = InitialNumbers::fixed;
    double mean1 = 0.0, mean2 = 0.0;  // Poissonian means when applicable

    void validate() const;
};

// Fringe analysis of an integer-valued distribution. Visibility averages
// (P_peak - P_trough)/(P_peak + P_trough) over the three peak/trough pairs
// around the highest peak (troughs sit two counts past each peak), clamped
// to [0, 1].
struct FringeReport {
    CountHistogram histogram;
    std::vector<long> peak_positions;
    int peak_spacing = 0;
    double visibility = 0.0;

    void validate() const;
};

// Distribution of the atom-number difference n1 - n2 of a trapped state:
// transform to the number basis and square. Support steps by 2 (fixed total).
CountHistogram final_number_distribution(const PlusMinusState& final_state);

// Convolution with a discrete Gaussian of r.m.s. sigma on the integer
// lattice (weights exp(-d^2/2 sigma^2), |d| <= ceil(6 sigma) + 1,
// normalized). sigma = 0 returns the input unchanged, bit-exact.
CountHistogram smear_histogram(const CountHistogram& hist, double sigma);

// Local maxima above rel_threshold * max over the stored value lattice.
std::vector<long> detect_peaks(const CountHistogram& hist,
                               double rel_threshold = 0.15);
// Most common gap between adjacent peaks (0 when fewer than 2 peaks).
int modal_spacing(const std::vector<long>& peaks);

// Peak positions, modal spacing, and anchored visibility of a histogram.
FringeReport analyze_fringes(const CountHistogram& hist);

// Pools each member's number-difference distribution after centering at the
// member's initial difference n1 - n2, applies the detector smear, and
// analyzes the fringes. Members carry their initial numbers in their sector.
FringeReport centered_difference_distribution(
    const std::vector<PlusMinusState>& finals, const DetectionModel& model);

// Same pooling without centering; the fringes wash out once initial numbers
// fluctuate, which is the point of the centered variable.
CountHistogram pooled_raw_difference(const std::vector<PlusMinusState>& finals);

// Row-per-initial-difference map of final-difference distributions; each row
// is normalized. Members are grouped by their sector's n1 - n2.
struct InitialFinalMap {
    std::vector<long> initial_values;  // ascending
    std::vector<long> final_values;    // ascending union lattice
    std::vector<double> probs;         // row-major [initial][final]

    double at(size_t row, size_t col) const {
        return probs[row * final_values.size() + col];
    }
    // Final value with the largest probability in the given row.
    long row_peak(size_t row) const;
};
InitialFinalMap initial_vs_final_map(const std::vector<PlusMinusState>& finals);

void write_map_csv(const std::string& path, const InitialFinalMap& map,
                   const std::map<std::string, std::string>& metadata);
std::string fringe_report_json(const FringeReport& report,
                               const std::map<std::string, std::string>& metadata);

}  // namespace mqs
