#include "mqs/qmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mqs/histogram.hpp"

namespace mqs {
namespace {

struct Window {
    int lo = 0, hi = -1;
};

// Indices carrying non-negligible probability; survival evaluation and decay
// application are restricted to this range.
Window support_window(const std::vector<double>& probs) {
    double mx = 0.0;
    for (double p : probs) mx = std::max(mx, p);
    const double thr = mx * 1e-30;
    Window w;
    int n = static_cast<int>(probs.size());
    w.lo = 0;
    while (w.lo < n && probs[w.lo] <= thr) ++w.lo;
    w.hi = n - 1;
    while (w.hi >= 0 && probs[w.hi] <= thr) --w.hi;
    return w;
}

// S as a polynomial in q = exp(-2Wt): sum_n p_n q^n, evaluated by Horner
// over the support window (one pow, no exp).
double survival_q(const std::vector<double>& probs, const Window& w, double q) {
    double acc = 0.0;
    for (int n = w.hi; n >= w.lo; --n) acc = acc * q + probs[n];
    return acc * std::pow(q, w.lo);
}

// Inverse-transform waiting time: solve S(t) = u. S is strictly decreasing
// from 1 to the dark-state weight, so after a doubling/halving bracket search
// from the mean-rate scale, geometric bisection in t converges with uniform
// relative precision at every scale.
double solve_waiting_time(const std::vector<double>& probs, const Window& w,
                          double w_rate, double u) {
    const double dark = (w.lo == 0) ? probs[0] : 0.0;
    if (u <= dark + 1e-300)
        throw DarkStateStall("drawn quantile falls inside the dark-state weight; "
                             "no further detection would ever occur");
    double nbar = 0.0;
    for (int n = w.lo; n <= w.hi; ++n) nbar += n * probs[n];
    if (!(nbar > 0.0))
        throw DarkStateStall("state has no detectable population");
    auto survival_t = [&](double t) {
        return survival_q(probs, w, std::exp(-2.0 * w_rate * t));
    };
    // Bracket [t_lo, t_hi] with S(t_lo) > u >= S(t_hi), starting from the
    // mean-rate scale. Termination is guaranteed: S(t) -> dark < u as t grows,
    // and downward the root cannot sit below ~(1-u)/rate >> 1e-300.
    double t_lo = 1.0 / (2.0 * w_rate * nbar), t_hi = t_lo;
    if (survival_t(t_lo) > u) {
        while (survival_t(t_hi) > u) {
            t_lo = t_hi;
            t_hi *= 2.0;
        }
    } else {
        while (t_lo > 1e-300 && survival_t(t_lo) <= u) {
            t_hi = t_lo;
            t_lo *= 0.5;
        }
        if (survival_t(t_lo) <= u) return t_lo;  // root at double underflow scale
    }
    for (int it = 0; it < 200 && t_hi > t_lo * (1.0 + 1e-11); ++it) {
        const double tm = std::sqrt(t_lo * t_hi);
        if (survival_t(tm) > u)
            t_lo = tm;
        else
            t_hi = tm;
    }
    return std::sqrt(t_lo * t_hi);
}

std::vector<double> probabilities(const PlusMinusState& s) {
    std::vector<double> p(s.amps.size());
    for (size_t i = 0; i < p.size(); ++i) p[i] = std::norm(s.amps[i]);
    return p;
}

// No-jump propagator over tau: amplitude factor exp(-W n tau) per basis
// state, applied as iterated powers of one exponential, then renormalized.
void apply_no_jump(PlusMinusState& s, double w_rate, double tau) {
    const double f = std::exp(-w_rate * tau);
    const Window w = support_window(probabilities(s));
    double fp = std::pow(f, w.lo);
    for (int n = 0; n < w.lo; ++n) s.amps[n] = 0.0;
    for (int n = w.lo; n < static_cast<int>(s.amps.size()); ++n) {
        s.amps[n] *= fp;
        fp *= f;
    }
    s.normalize();
}

double max_abs_eigenvalue(const SectorSpec& sector, int n_removed) {
    PlusMinusState probe;
    probe.sector = sector;
    probe.n_removed = n_removed;
    probe.amps.assign(probe.n_tot() + 1, 0.0);
    return std::max(std::abs(probe.eigenvalue(0)),
                    std::abs(probe.eigenvalue(probe.n_tot())));
}

}  // namespace

void ContinuousParams::validate(const SectorSpec& sector) const {
    sector.validate();
    if (!(w_rate > 0.0)) throw ConfigError("detection rate W must be positive");
    if (nu < 1) throw ConfigError("detection count nu must be at least 1");
    const int nmin = std::min(sector.n1, sector.n2);
    if (nmin == 0) throw ConfigError("both modes must start populated");
    if (static_cast<double>(nu) / nmin >= 0.1)
        throw UndepletedAssumptionViolated(
            "nu = " + std::to_string(nu) + " is not small against the mode "
            "population " + std::to_string(nmin) + " (ratio must be < 0.1)");
}

double JumpOperator::amplitude(int n_plus) const {
    return std::sqrt(2.0 * w_rate * n_plus);
}

double JumpOperator::no_jump_factor(int n_plus, double t) const {
    return std::exp(-w_rate * n_plus * t);
}

double JumpOperator::total_rate(const PlusMinusState& state) const {
    double r = 0.0;
    for (size_t n = 0; n < state.amps.size(); ++n)
        r += rate(static_cast<int>(n)) * std::norm(state.amps[n]);
    return r;
}

PlusMinusState JumpOperator::apply(const PlusMinusState& state) const {
    if (state.n_tot() < 1)
        throw DarkStateStall("no trapped atoms left to detect");
    PlusMinusState out;
    out.sector = state.sector;
    out.n_removed = state.n_removed + 1;
    out.amps.resize(state.amps.size() - 1);
    for (size_t n = 0; n < out.amps.size(); ++n)
        out.amps[n] = amplitude(static_cast<int>(n) + 1) * state.amps[n + 1];
    const double nrm = std::sqrt(out.norm2());
    if (nrm < 1e-300)
        throw DarkStateStall("jump has zero amplitude on this state");
    for (auto& a : out.amps) a /= nrm;
    return out;
}

JumpOperator effective_jump_operator(const SectorSpec& sector, double w_rate) {
    sector.validate();
    if (!(w_rate > 0.0)) throw ConfigError("detection rate W must be positive");
    return JumpOperator{w_rate};
}

void TrajectoryRecord::validate() const {
    if (taus.size() != cosphi_history.size())
        throw Error("trajectory record lists have mismatched lengths");
    for (double t : taus)
        if (!(t > 0.0)) throw Error("waiting times must be positive");
    const double bound =
        max_abs_eigenvalue(final_state.sector, final_state.n_removed) + 1e-12;
    for (double c : cosphi_history)
        if (std::abs(c) > bound)
            throw Error("phase expectation outside the spectral range");
    final_state.validate(1e-10);
}

TrajectoryRecord run_trajectory(const SectorSpec& sector,
                                const ContinuousParams& params,
                                const PlusMinusState& initial,
                                uint64_t trajectory_index) {
    params.validate(sector);
    initial.validate(1e-9);
    TrajectoryRecord rec;
    rec.stream_seed = derive_stream_seed(params.seed, trajectory_index);
    Rng rng(rec.stream_seed);
    const JumpOperator op = effective_jump_operator(sector, params.w_rate);
    PlusMinusState state = initial;
    rec.taus.reserve(params.nu);
    rec.cosphi_history.reserve(params.nu);
    for (int k = 0; k < params.nu; ++k) {
        const auto probs = probabilities(state);
        const Window w = support_window(probs);
        const double u = rng.uniform_pos();
        const double tau = solve_waiting_time(probs, w, params.w_rate, u);
        apply_no_jump(state, params.w_rate, tau);
        state = op.apply(state);
        rec.taus.push_back(tau);
        rec.cosphi_history.push_back(cosphi_expectation(state));
    }
    rec.final_state = std::move(state);
    return rec;
}

TrajectoryRecord run_trajectory_for_time(const SectorSpec& sector,
                                         const ContinuousParams& params,
                                         const PlusMinusState& initial,
                                         double duration,
                                         uint64_t trajectory_index) {
    // No depletion-ratio gate here: the jump count is set by the horizon, and
    // this entry point exists exactly for tiny-system density-matrix checks.
    sector.validate();
    if (!(params.w_rate > 0.0))
        throw ConfigError("detection rate W must be positive");
    initial.validate(1e-9);
    if (!(duration >= 0.0)) throw ConfigError("duration must be nonnegative");
    TrajectoryRecord rec;
    rec.stream_seed = derive_stream_seed(params.seed, trajectory_index);
    Rng rng(rec.stream_seed);
    const JumpOperator op = effective_jump_operator(sector, params.w_rate);
    PlusMinusState state = initial;
    double remaining = duration;
    while (remaining > 0.0 && state.n_tot() > 0) {
        const auto probs = probabilities(state);
        const Window w = support_window(probs);
        const double u = rng.uniform_pos();
        if (survival_q(probs, w, std::exp(-2.0 * params.w_rate * remaining)) >= u) {
            break;  // no further jump inside the horizon
        }
        const double tau = solve_waiting_time(probs, w, params.w_rate, u);
        apply_no_jump(state, params.w_rate, tau);
        state = op.apply(state);
        rec.taus.push_back(tau);
        rec.cosphi_history.push_back(cosphi_expectation(state));
        remaining -= tau;
    }
    if (remaining > 0.0) apply_no_jump(state, params.w_rate, remaining);
    rec.final_state = std::move(state);
    return rec;
}

EnsembleResult run_ensemble(const SectorSpec& sector,
                            const ContinuousParams& params, int count) {
    if (count < 1) throw ConfigError("ensemble size must be at least 1");
    EnsembleResult res;
    res.records.reserve(count);
    const uint64_t cap = static_cast<uint64_t>(count) * 10 + 1000;
    const PlusMinusState initial = sector.n1 == sector.n2
                                       ? symmetric_pair_state(sector.n1)
                                       : product_state_plusminus(sector);
    uint64_t index = 0;
    while (static_cast<int>(res.records.size()) < count) {
        if (index >= cap)
            throw DarkStateStall("ensemble stall rate too high to reach the "
                                 "requested number of completed trajectories");
        try {
            res.records.push_back(run_trajectory(sector, params, initial, index));
        } catch (const DarkStateStall&) {
            ++res.n_stalled;
        }
        ++index;
    }
    res.n_attempted = index;
    return res;
}

double ks_statistic_exponential(std::vector<double> samples) {
    if (samples.empty()) throw ConfigError("KS statistic needs samples");
    std::sort(samples.begin(), samples.end());
    const size_t n = samples.size();
    double d = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double cdf = 1.0 - std::exp(-samples[i]);
        d = std::max(d, (i + 1.0) / n - cdf);
        d = std::max(d, cdf - static_cast<double>(i) / n);
    }
    return d;
}

double kolmogorov_pvalue(double d, size_t n) {
    if (n == 0) throw ConfigError("KS p-value needs a sample size");
    const double rn = std::sqrt(static_cast<double>(n));
    const double lam = (rn + 0.12 + 0.11 / rn) * d;
    double p = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lam * lam);
        p += (j % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-300) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

EnsembleSummary ensemble_statistics(const std::vector<TrajectoryRecord>& records,
                                    const SectorSpec& sector, double w_rate) {
    if (records.size() < 2)
        throw ConfigError("ensemble statistics need at least 2 records");
    EnsembleSummary s;
    s.n_records = static_cast<int>(records.size());
    const double n_mean = 0.5 * (sector.n1 + sector.n2);
    std::vector<double> pooled;
    int per_pass = 0;
    double ssq = 0.0;
    for (const auto& rec : records) {
        if (rec.taus.empty()) throw ConfigError("record without detections");
        double tbar = 0.0;
        for (double t : rec.taus) tbar += t;
        tbar /= rec.taus.size();
        const double cp = rec.cosphi_history.back();
        s.tau_vs_cosphi.emplace_back(tbar, cp);
        const double pred =
            1.0 / (2.0 * w_rate * n_mean * std::max(1.0 + cp, 1e-12));
        const double r = (tbar - pred) / pred;
        ssq += r * r;
        std::vector<double> scaled;
        scaled.reserve(rec.taus.size());
        for (double t : rec.taus) {
            scaled.push_back(t / tbar);
            pooled.push_back(t / tbar);
        }
        const double dsingle = ks_statistic_exponential(std::move(scaled));
        if (kolmogorov_pvalue(dsingle, rec.taus.size()) > 0.01) ++per_pass;
    }
    s.rms_relative_residual = std::sqrt(ssq / records.size());
    s.pooled_ks_stat = ks_statistic_exponential(pooled);
    s.pooled_ks_p = kolmogorov_pvalue(s.pooled_ks_stat, pooled.size());
    s.per_trajectory_pass_fraction =
        static_cast<double>(per_pass) / records.size();
    return s;
}

void write_trajectories_jsonl(const std::string& path,
                              const std::vector<TrajectoryRecord>& records,
                              const std::string& metadata_json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    out << metadata_json << "\n";
    for (const auto& rec : records) {
        out << "{\"seed\":" << rec.stream_seed << ",\"taus\":[";
        for (size_t i = 0; i < rec.taus.size(); ++i)
            out << (i ? "," : "") << format_double(rec.taus[i]);
        out << "],\"cosphi_history\":[";
        for (size_t i = 0; i < rec.cosphi_history.size(); ++i)
            out << (i ? "," : "") << format_double(rec.cosphi_history[i]);
        out << "]}\n";
    }
    if (!out) throw Error("write failed: " + path);
}

}  // namespace mqs
