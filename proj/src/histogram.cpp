#include "mqs/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace mqs {

double CountHistogram::total() const {
    return std::accumulate(probs.begin(), probs.end(), 0.0);
}

double CountHistogram::mean() const {
    double m = 0.0;
    for (size_t i = 0; i < values.size(); ++i) m += values[i] * probs[i];
    double t = total();
    return t > 0 ? m / t : 0.0;
}

double CountHistogram::variance() const {
    double mu = mean();
    double v = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        double d = values[i] - mu;
        v += d * d * probs[i];
    }
    double t = total();
    return t > 0 ? v / t : 0.0;
}

void CountHistogram::normalize() {
    double t = total();
    if (t <= 0.0) throw Error("histogram has no probability mass to normalize");
    for (double& p : probs) p /= t;
}

double CountHistogram::prob_at(long value) const {
    auto it = std::lower_bound(values.begin(), values.end(), value);
    if (it == values.end() || *it != value) return 0.0;
    return probs[static_cast<size_t>(it - values.begin())];
}

void CountHistogram::validate(double tol) const {
    if (values.size() != probs.size())
        throw Error("histogram values/probs length mismatch");
    for (size_t i = 1; i < values.size(); ++i)
        if (values[i] <= values[i - 1])
            throw Error("histogram values must be strictly ascending");
    for (double p : probs)
        if (!(p >= 0.0)) throw Error("histogram probabilities must be nonnegative");
    if (std::abs(total() - 1.0) > tol)
        throw Error("histogram mass deviates from 1 beyond tolerance");
}

CountHistogram CountHistogram::from_map(const std::string& observable,
                                        const std::map<long, double>& mass) {
    CountHistogram h;
    h.observable = observable;
    h.values.reserve(mass.size());
    h.probs.reserve(mass.size());
    for (const auto& [v, p] : mass) {
        h.values.push_back(v);
        h.probs.push_back(p);
    }
    return h;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_histogram_csv(const std::string& path, const CountHistogram& hist) {
    std::ofstream out(path, std::ios::binary);  // binary: no CRLF surprises
    if (!out) throw Error("cannot open output file: " + path);
    for (const auto& [k, v] : hist.metadata) out << "# " << k << ": " << v << "\n";
    out << "# observable: " << hist.observable << "\n";
    out << "value,probability\n";
    for (size_t i = 0; i < hist.values.size(); ++i)
        out << hist.values[i] << "," << format_double(hist.probs[i]) << "\n";
    if (!out) throw Error("write failed: " + path);
}

}  // namespace mqs
