#pragma once
#include <map>
#include <string>
#include <vector>

#include "mqs/errors.hpp"

namespace mqs {

// Discrete probability distribution over an integer observable, with
// free-form provenance metadata that output writers embed in file headers.
struct CountHistogram {
    std::string observable;
    std::vector<long> values;   // ascending, unique
    std::vector<double> probs;  // same length
    std::map<std::string, std::string> metadata;

    double total() const;
    double mean() const;
    double variance() const;
    void normalize();
    double prob_at(long value) const;  // 0 for absent values
    void validate(double tol = 1e-9) const;

    static CountHistogram from_map(const std::string& observable,
                                   const std::map<long, double>& mass);
};

// Deterministic shortest-unambiguous formatting for doubles (17 significant
// digits round-trips exactly); all file writers use this so identical runs
// produce byte-identical output.
std::string format_double(double v);

// CSV with "# key: value" header lines followed by "value,probability" rows.
void write_histogram_csv(const std::string& path, const CountHistogram& hist);

}  // namespace mqs
