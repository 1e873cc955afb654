#include "mqs/coherent.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mqs {
namespace {

constexpr double kPi = 3.14159265358979323846;

bool symmetric_config(const SectorSpec& sector, double alpha) {
    return sector.n1 == sector.n2 && std::abs(alpha - kPi / 4) < 1e-15;
}

int sign_pow(double base_sign, int exponent) {
    return (base_sign < 0 && (exponent & 1)) ? -1 : 1;
}

// Exact amplitudes for alpha = pi/4, n1 = n2 = N. The initial state expands
// over symmetric-mode pairs; each pair component (c b+^dag + s b0^dag)^{2m}
// contributes a binomial in (n_plus = 2m - n0, n0) with the antisymmetric
// occupation 2(N - m) frozen.
void fill_symmetric(JointState& st) {
    const int N = st.sector.n1;
    const double c = std::cos(st.vt_value), s = std::sin(st.vt_value);
    const double lc = (c == 0.0) ? 0.0 : std::log(std::abs(c));
    const double ls = (s == 0.0) ? 0.0 : std::log(std::abs(s));
    using LC = LogCombinatorics;
    for (int m = 0; m <= N; ++m) {
        const double base = -N * std::log(2.0) + LC::log_factorial(2 * m) +
                            0.5 * LC::log_factorial(2 * N - 2 * m) -
                            LC::log_factorial(m) - LC::log_factorial(N - m);
        const int sgn_m = ((N - m) & 1) ? -1 : 1;
        const int n0_hi = std::min(2 * m, st.n0_max);
        for (int n0 = 0; n0 <= n0_hi; ++n0) {
            const int np = 2 * m - n0;
            if (s == 0.0 && n0 > 0) continue;
            if (c == 0.0 && np > 0) continue;
            double lm = base - 0.5 * LC::log_factorial(n0) -
                        0.5 * LC::log_factorial(np) + np * lc + n0 * ls;
            double mag = std::exp(lm);
            if (mag < 1e-300) continue;
            st.at(np, n0) = sgn_m * sign_pow(c, np) * sign_pow(s, n0) * mag;
        }
    }
}

// General mixing angle: expand both rotated creation-operator polynomials.
// Term count is O(n1^2 n2^2), so this path is capped.
void fill_general(JointState& st) {
    const int N1 = st.sector.n1, N2 = st.sector.n2, T = st.sector.n_tot();
    if (T > 150)
        throw DimensionCap(
            "general-angle expansion capped at 150 total quanta; the symmetric "
            "configuration (equal populations, alpha = pi/4) has no cap");
    const double ca = std::cos(st.alpha), sa = std::sin(st.alpha);
    const double cv = std::cos(st.vt_value), sv = std::sin(st.vt_value);
    const double xi1 = ca * ca * cv + sa * sa;
    const double xi2 = ca * sa * (cv - 1.0);
    const double xi0 = ca * sv;
    const double xi1t = sa * sa * cv + ca * ca;
    const double xi0t = sa * sv;
    using LC = LogCombinatorics;

    struct Term {
        int a, b, c;  // powers of (b1, b2, b0) creation operators
        double coeff;
    };
    auto expand = [&](int n, double w1, double w2, double w0) {
        std::vector<Term> out;
        for (int a = 0; a <= n; ++a)
            for (int b = 0; b + a <= n; ++b) {
                int c = n - a - b;
                double lm = LC::log_factorial(n) - LC::log_factorial(a) -
                            LC::log_factorial(b) - LC::log_factorial(c);
                double coeff = std::exp(lm) * std::pow(w1, a) * std::pow(w2, b) *
                               std::pow(w0, c);
                if (coeff != 0.0) out.push_back({a, b, c, coeff});
            }
        return out;
    };
    const auto t1 = expand(N1, xi1, xi2, xi0);
    const auto t2 = expand(N2, xi2, xi1t, xi0t);

    // Accumulate polynomial coefficients over final (n1, n2); n0 is implied.
    std::vector<double> acc(static_cast<size_t>(T + 1) * (T + 1), 0.0);
    for (const auto& u : t1)
        for (const auto& v : t2) {
            int n1 = u.a + v.a, n2 = u.b + v.b;
            acc[static_cast<size_t>(n1) * (T + 1) + n2] += u.coeff * v.coeff;
        }

    // Convert each fixed-n0 anti-diagonal to the plus/minus basis.
    for (int n0 = 0; n0 <= st.n0_max; ++n0) {
        const int s = T - n0;
        NumberBasisState nb;
        nb.sector = st.sector;
        nb.n_removed = n0;
        nb.amps.assign(s + 1, 0.0);
        bool any = false;
        for (int n1 = 0; n1 <= s; ++n1) {
            double a = acc[static_cast<size_t>(n1) * (T + 1) + (s - n1)];
            if (a == 0.0) continue;
            double lf = 0.5 * (LC::log_factorial(n1) + LC::log_factorial(s - n1) +
                               LC::log_factorial(n0) - LC::log_factorial(N1) -
                               LC::log_factorial(N2));
            nb.amps[n1] = a * std::exp(lf);
            any = true;
        }
        if (!any) continue;
        // the transform insists on unit norm; carry the slice weight around it
        const double scale = std::sqrt(nb.norm2());
        if (scale < 1e-150) continue;
        for (auto& a : nb.amps) a /= scale;
        const PlusMinusState pm = number_to_plusminus(nb);
        for (int np = 0; np <= s; ++np) st.at(np, n0) = pm.amps[np] * scale;
    }

    // Flush cancellation residue so selection rules hold exactly.
    double mx = 0.0;
    for (const auto& a : st.amps) mx = std::max(mx, std::abs(a));
    const double floor = mx * 1e-13;
    for (auto& a : st.amps)
        if (std::abs(a) < floor) a = 0.0;
}

}  // namespace

double CouplingParams::mean_transferred(const SectorSpec& sector) const {
    const double s2 = std::sin(vt()) * std::sin(vt());
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    return s2 * (sector.n1 * ca * ca + sector.n2 * sa * sa);
}

void CouplingParams::validate(const SectorSpec& sector) const {
    sector.validate();
    if (!(coupling > 0.0)) throw ConfigError("coupling strength must be positive");
    if (!(alpha > 0.0 && alpha < kPi / 2))
        throw ConfigError("mixing angle must lie strictly between 0 and pi/2");
    if (!(time >= 0.0)) throw ConfigError("pulse duration must be nonnegative");
    const int nmin = std::min(sector.n1, sector.n2);
    if (nmin == 0) throw ConfigError("both modes must start populated");
    const double ratio = mean_transferred(sector) / nmin;
    if (ratio >= 0.1)
        throw UndepletedAssumptionViolated(
            "expected transfer is " + format_double(ratio) +
            " of the smaller mode population; the weak-depletion treatment "
            "requires < 0.1 (reduce coupling * time)");
}

double JointState::norm2() const {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s;
}

void JointState::validate() const {
    if (amps.size() != static_cast<size_t>(sector.n_tot() + 1) * (n0_max + 1))
        throw Error("joint state storage does not match its declared shape");
    if (std::abs(norm2() - 1.0) > 1e-9)
        throw TruncationError("joint state norm deviates from 1 beyond 1e-9; "
                              "the n0 cutoff is too small");
    if (n0_max < sector.n_tot()) {
        double tail = 0.0;
        for (int np = 0; np <= n_plus_max(); ++np) tail += std::norm(at(np, n0_max));
        if (tail > 1e-10)
            throw TruncationError(
                "probability at the n0 cutoff is " + format_double(tail) +
                " (> 1e-10); increase n0_max");
    }
    if (symmetric_config(sector, alpha)) {
        const int par = sector.n_tot() & 1;
        for (int np = 0; np <= n_plus_max(); ++np)
            for (int n0 = 0; n0 <= n0_max; ++n0)
                if (((np + n0) & 1) != par && std::abs(at(np, n0)) > 1e-10)
                    throw Error("selection-rule violation: population at "
                                "forbidden (n_plus + n0) parity");
    }
}

std::vector<double> default_phi_grid(int size) {
    if (size < 2) throw ConfigError("phase grid needs at least 2 points");
    std::vector<double> g(size);
    const double dphi = 2 * kPi / size;
    for (int i = 0; i < size; ++i) g[i] = -kPi + (i + 0.5) * dphi;
    return g;
}

JointState evolve_general_alpha(const SectorSpec& sector, const CouplingParams& p,
                                int n0_max) {
    p.validate(sector);
    const int T = sector.n_tot();
    if (n0_max < 0) {
        const double mean = p.mean_transferred(sector);
        const double s2 = std::sin(p.vt()) * std::sin(p.vt());
        double var;
        if (symmetric_config(sector, p.alpha)) {
            var = n0_moments(sector, p).second;
        } else {
            var = mean + static_cast<double>(T) * T * s2 * s2 + 1.0;
        }
        n0_max = static_cast<int>(std::ceil(mean + 10.0 * std::sqrt(var))) + 2;
    }
    n0_max = std::clamp(n0_max, 2, T);

    JointState st;
    st.sector = sector;
    st.alpha = p.alpha;
    st.vt_value = p.vt();
    st.n0_max = n0_max;
    st.amps.assign(static_cast<size_t>(T + 1) * (n0_max + 1), 0.0);
    if (symmetric_config(sector, p.alpha))
        fill_symmetric(st);
    else
        fill_general(st);
    st.validate();
    return st;
}

CountHistogram n0_distribution(const JointState& state) {
    CountHistogram h;
    h.observable = "n0";
    h.values.resize(state.n0_max + 1);
    h.probs.assign(state.n0_max + 1, 0.0);
    for (int n0 = 0; n0 <= state.n0_max; ++n0) {
        h.values[n0] = n0;
        double p = 0.0;
        for (int np = 0; np <= state.n_plus_max(); ++np)
            p += std::norm(state.at(np, n0));
        h.probs[n0] = p;
    }
    h.metadata["n1"] = std::to_string(state.sector.n1);
    h.metadata["n2"] = std::to_string(state.sector.n2);
    h.metadata["alpha"] = format_double(state.alpha);
    h.metadata["vt"] = format_double(state.vt_value);
    return h;
}

std::pair<PlusMinusState, double> project_on_n0(const JointState& state, int n0) {
    if (n0 < 0 || n0 > state.n0_max)
        throw ConfigError("requested transfer count lies outside the stored range");
    double p = 0.0;
    for (int np = 0; np <= state.n_plus_max(); ++np)
        p += std::norm(state.at(np, n0));
    if (p < 1e-30)
        throw ZeroProbabilityOutcome("outcome n0 = " + std::to_string(n0) +
                                     " has probability below 1e-30");
    PlusMinusState out;
    out.sector = state.sector;
    out.n_removed = 0;
    out.amps.assign(state.sector.n_tot() + 1, 0.0);
    const double inv = 1.0 / std::sqrt(p);
    for (int np = 0; np + n0 <= state.sector.n_tot(); ++np)
        out.amps[np + n0] = state.at(np, n0) * inv;
    return {out, p};
}

ConditionalPhaseDistribution conditional_phase_exact(const JointState& state,
                                                     int n0, int phi_grid_size) {
    auto [pm, prob] = project_on_n0(state, n0);
    (void)prob;
    ConditionalPhaseDistribution d;
    d.sector = state.sector;
    d.n0_observed = n0;
    const int T = state.sector.n_tot();
    double qmax = 0.0;
    for (const auto& a : pm.amps) qmax = std::max(qmax, std::norm(a));
    std::vector<double> lam, q;
    for (int k = 0; k <= T; ++k) {
        double pk = std::norm(pm.amps[k]);
        d.support.emplace_back(pm.eigenvalue(k), pk);
        if (pk > qmax * 1e-18) {
            lam.push_back(pm.eigenvalue(k));
            q.push_back(pk);
        }
    }
    if (phi_grid_size > 0 && lam.size() >= 2) {
        d.phi_grid = default_phi_grid(phi_grid_size);
        d.phi_density.assign(d.phi_grid.size(), 0.0);
        // Masses on the populated eigenvalue lattice become a density via
        // local spacing, then map to phi with the |sin phi| Jacobian (each
        // eigenvalue corresponds to +/- phi).
        for (size_t i = 0; i < d.phi_grid.size(); ++i) {
            const double lv = std::cos(d.phi_grid[i]);
            auto it = std::upper_bound(lam.begin(), lam.end(), lv);
            if (it == lam.begin() || it == lam.end()) continue;
            size_t hi = static_cast<size_t>(it - lam.begin()), lo = hi - 1;
            const double gap = lam[hi] - lam[lo];
            const double w = (lv - lam[lo]) / gap;
            const double rho = ((1.0 - w) * q[lo] + w * q[hi]) / gap;
            d.phi_density[i] = 0.5 * rho * std::abs(std::sin(d.phi_grid[i]));
        }
        double mass = 0.0;
        const double dphi = 2 * kPi / phi_grid_size;
        for (double f : d.phi_density) mass += f * dphi;
        if (mass > 0)
            for (double& f : d.phi_density) f /= mass;
    }
    return d;
}

ConditionalPhaseDistribution gaussian_phase_approx(const SectorSpec& sector,
                                                   const CouplingParams& p, int n0,
                                                   const std::vector<double>& grid) {
    if (!symmetric_config(sector, p.alpha))
        throw FormulaScopeError(
            "the Gaussian phase approximation is stated for equal populations "
            "at alpha = pi/4");
    if (n0 <= 0)
        throw ConfigError("the Gaussian approximation needs a positive transfer count");
    ConditionalPhaseDistribution d;
    d.sector = sector;
    d.n0_observed = n0;
    d.phi_grid = grid;
    d.phi_density.resize(grid.size());
    const double N = sector.n1;
    const double s2 = std::sin(p.vt()) * std::sin(p.vt());
    for (size_t i = 0; i < grid.size(); ++i) {
        const double dev = n0 - N * s2 * (1.0 + std::cos(grid[i]));
        d.phi_density[i] = std::exp(-dev * dev / (2.0 * n0));
    }
    if (grid.size() < 2) throw ConfigError("phase grid needs at least 2 points");
    const double dphi = grid[1] - grid[0];
    double mass = 0.0;
    for (double f : d.phi_density) mass += f * dphi;
    if (mass <= 0.0)
        throw ZeroProbabilityOutcome("Gaussian phase weight vanishes on the grid");
    for (double& f : d.phi_density) f /= mass;
    return d;
}

double total_variation_phi(const ConditionalPhaseDistribution& a,
                           const ConditionalPhaseDistribution& b) {
    if (a.phi_grid.size() != b.phi_grid.size() || a.phi_grid.empty())
        throw ConfigError("total variation needs matching non-empty phase grids");
    for (size_t i = 0; i < a.phi_grid.size(); ++i)
        if (std::abs(a.phi_grid[i] - b.phi_grid[i]) > 1e-12)
            throw ConfigError("total variation needs matching phase grids");
    const double dphi = 2 * kPi / a.phi_grid.size();
    double tv = 0.0;
    for (size_t i = 0; i < a.phi_grid.size(); ++i)
        tv += std::abs(a.phi_density[i] - b.phi_density[i]);
    return 0.5 * tv * dphi;
}

std::pair<double, double> n0_moments(const SectorSpec& sector,
                                     const CouplingParams& p) {
    if (!symmetric_config(sector, p.alpha))
        throw FormulaScopeError(
            "closed-form transfer moments are stated for equal populations at "
            "alpha = pi/4");
    const double N = sector.n1;
    const double s = std::sin(p.vt()), c = std::cos(p.vt());
    const double mean = N * s * s;
    const double var = N * s * s * c * c + 0.5 * N * N * s * s * s * s;
    return {mean, var};
}

}  // namespace mqs
