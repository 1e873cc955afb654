#include "mqs/interference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace mqs {

void DetectionModel::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw ConfigError("counting error sigma must be finite and nonnegative");
    if (initial_number_model == InitialNumbers::poissonian &&
        (!(mean1 > 0.0) || !(mean2 > 0.0)))
        throw ConfigError("Poissonian initial-number means must be positive");
}

void FringeReport::validate() const {
    histogram.validate();
    if (visibility < 0.0 || visibility > 1.0)
        throw Error("visibility outside [0, 1]");
}

CountHistogram final_number_distribution(const PlusMinusState& final_state) {
    const NumberBasisState nb = plusminus_to_number(final_state);
    const int t = nb.n_tot();
    CountHistogram h;
    h.observable = "delta_n_final";
    h.values.resize(t + 1);
    h.probs.resize(t + 1);
    for (int n1 = 0; n1 <= t; ++n1) {
        h.values[n1] = 2L * n1 - t;
        h.probs[n1] = std::norm(nb.amps[n1]);
    }
    h.metadata["n1"] = std::to_string(final_state.sector.n1);
    h.metadata["n2"] = std::to_string(final_state.sector.n2);
    h.metadata["n_removed"] = std::to_string(final_state.n_removed);
    return h;
}

CountHistogram smear_histogram(const CountHistogram& hist, double sigma) {
    if (sigma == 0.0) return hist;
    if (!(sigma > 0.0)) throw ConfigError("smear width must be nonnegative");
    const int reach = static_cast<int>(std::ceil(6.0 * sigma)) + 1;
    std::vector<double> w(2 * reach + 1);
    double wsum = 0.0;
    for (int d = -reach; d <= reach; ++d)
        wsum += w[d + reach] = std::exp(-0.5 * d * d / (sigma * sigma));
    for (double& x : w) x /= wsum;
    std::map<long, double> mass;
    for (size_t i = 0; i < hist.values.size(); ++i)
        for (int d = -reach; d <= reach; ++d)
            mass[hist.values[i] + d] += hist.probs[i] * w[d + reach];
    CountHistogram out = CountHistogram::from_map(hist.observable, mass);
    out.metadata = hist.metadata;
    out.metadata["sigma"] = format_double(sigma);
    return out;
}

std::vector<long> detect_peaks(const CountHistogram& hist, double rel_threshold) {
    std::vector<long> peaks;
    if (hist.probs.size() < 3) return peaks;
    const double mx = *std::max_element(hist.probs.begin(), hist.probs.end());
    for (size_t i = 1; i + 1 < hist.probs.size(); ++i)
        if (hist.probs[i] > hist.probs[i - 1] && hist.probs[i] > hist.probs[i + 1] &&
            hist.probs[i] > rel_threshold * mx)
            peaks.push_back(hist.values[i]);
    return peaks;
}

int modal_spacing(const std::vector<long>& peaks) {
    if (peaks.size() < 2) return 0;
    std::map<long, int> gaps;
    for (size_t i = 1; i < peaks.size(); ++i) ++gaps[peaks[i] - peaks[i - 1]];
    long best = 0;
    int best_count = -1;
    for (const auto& [g, c] : gaps)
        if (c > best_count) {
            best = g;
            best_count = c;
        }
    return static_cast<int>(best);
}

FringeReport analyze_fringes(const CountHistogram& hist) {
    FringeReport rep;
    rep.histogram = hist;
    rep.histogram.normalize();
    rep.peak_positions = detect_peaks(rep.histogram);
    rep.peak_spacing = modal_spacing(rep.peak_positions);
    if (!rep.histogram.values.empty()) {
        const size_t imax = static_cast<size_t>(
            std::max_element(rep.histogram.probs.begin(), rep.histogram.probs.end()) -
            rep.histogram.probs.begin());
        const long anchor = rep.histogram.values[imax];
        double sum = 0.0;
        int used = 0;
        for (int k = -1; k <= 1; ++k) {
            const double pp = rep.histogram.prob_at(anchor + 4L * k);
            const double pt = rep.histogram.prob_at(anchor + 4L * k + 2);
            if (pp + pt <= 0.0) continue;
            sum += (pp - pt) / (pp + pt);
            ++used;
        }
        if (used > 0) rep.visibility = std::clamp(sum / used, 0.0, 1.0);
    }
    rep.validate();
    return rep;
}

namespace {

void pool_member(std::map<long, double>& mass, const PlusMinusState& state,
                 long shift) {
    const CountHistogram h = final_number_distribution(state);
    for (size_t i = 0; i < h.values.size(); ++i)
        mass[h.values[i] - shift] += h.probs[i];
}

}  // namespace

FringeReport centered_difference_distribution(
    const std::vector<PlusMinusState>& finals, const DetectionModel& model) {
    model.validate();
    if (finals.empty()) throw ConfigError("fringe pooling needs ensemble members");
    std::map<long, double> mass;
    for (const auto& st : finals)
        pool_member(mass, st, st.sector.n1 - st.sector.n2);
    CountHistogram pooled = CountHistogram::from_map("delta_n12", mass);
    pooled.normalize();
    pooled.metadata["members"] = std::to_string(finals.size());
    FringeReport rep = analyze_fringes(smear_histogram(pooled, model.sigma));
    return rep;
}

CountHistogram pooled_raw_difference(const std::vector<PlusMinusState>& finals) {
    if (finals.empty()) throw ConfigError("fringe pooling needs ensemble members");
    std::map<long, double> mass;
    for (const auto& st : finals) pool_member(mass, st, 0);
    CountHistogram pooled = CountHistogram::from_map("delta_n_final", mass);
    pooled.normalize();
    pooled.metadata["members"] = std::to_string(finals.size());
    return pooled;
}

long InitialFinalMap::row_peak(size_t row) const {
    const size_t w = final_values.size();
    size_t best = 0;
    for (size_t c = 1; c < w; ++c)
        if (probs[row * w + c] > probs[row * w + best]) best = c;
    return final_values[best];
}

InitialFinalMap initial_vs_final_map(const std::vector<PlusMinusState>& finals) {
    if (finals.empty()) throw ConfigError("map construction needs ensemble members");
    std::map<long, std::map<long, double>> rows;
    for (const auto& st : finals)
        pool_member(rows[st.sector.n1 - st.sector.n2], st, 0);
    InitialFinalMap map;
    std::map<long, double> all;
    for (const auto& [dn, row] : rows) {
        map.initial_values.push_back(dn);
        for (const auto& [v, p] : row) all[v] += p;
    }
    for (const auto& [v, p] : all) map.final_values.push_back(v);
    map.probs.assign(map.initial_values.size() * map.final_values.size(), 0.0);
    for (size_t r = 0; r < map.initial_values.size(); ++r) {
        const auto& row = rows[map.initial_values[r]];
        double total = 0.0;
        for (const auto& [v, p] : row) total += p;
        for (size_t c = 0; c < map.final_values.size(); ++c) {
            auto it = row.find(map.final_values[c]);
            if (it != row.end())
                map.probs[r * map.final_values.size() + c] = it->second / total;
        }
    }
    return map;
}

void write_map_csv(const std::string& path, const InitialFinalMap& map,
                   const std::map<std::string, std::string>& metadata) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    for (const auto& [k, v] : metadata) out << "# " << k << ": " << v << "\n";
    out << "initial_dn";
    for (long v : map.final_values) out << "," << v;
    out << "\n";
    for (size_t r = 0; r < map.initial_values.size(); ++r) {
        out << map.initial_values[r];
        for (size_t c = 0; c < map.final_values.size(); ++c)
            out << "," << format_double(map.at(r, c));
        out << "\n";
    }
    if (!out) throw Error("write failed: " + path);
}

std::string fringe_report_json(const FringeReport& report,
                               const std::map<std::string, std::string>& metadata) {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : metadata) j["metadata"][k] = v;
    for (const auto& [k, v] : report.histogram.metadata)
        j["metadata"][k] = v;
    j["observable"] = report.histogram.observable;
    j["peak_positions"] = report.peak_positions;
    j["peak_spacing"] = report.peak_spacing;
    j["visibility"] = report.visibility;
    j["histogram"]["values"] = report.histogram.values;
    j["histogram"]["probabilities"] = report.histogram.probs;
    return j.dump(2);
}

}  // namespace mqs
