#include "mqs/fock.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace mqs {

namespace {
constexpr double kFlush = 1e-300;  // amplitudes below this are exact zeros
constexpr double kLn2 = 0.6931471805599453;
}  // namespace

const std::vector<double>& LogCombinatorics::table_(long need) {
    static std::vector<double> table{0.0, 0.0};  // ln 0! = ln 1! = 0
    static std::mutex mu;
    if (static_cast<long>(table.size()) <= need) {
        std::lock_guard<std::mutex> lock(mu);
        while (static_cast<long>(table.size()) <= need) {
            long k = static_cast<long>(table.size());
            table.push_back(table.back() + std::log(static_cast<double>(k)));
        }
    }
    return table;
}

double LogCombinatorics::log_factorial(long n) {
    if (n < 0) throw Error("log_factorial: negative argument");
    return table_(n)[n];
}

double LogCombinatorics::log_binomial(long n, long k) {
    if (k < 0 || k > n) throw Error("log_binomial: k outside [0, n]");
    const auto& t = table_(n);
    return t[n] - t[k] - t[n - k];
}

void SectorSpec::validate() const {
    if (n1 < 0 || n2 < 0) throw ConfigError("sector: atom numbers must be non-negative");
    if (n_tot() < 1) throw ConfigError("sector: total atom number must be >= 1");
}

double PlusMinusState::cosphi_denom() const {
    return 2.0 * std::sqrt(n1_eff() * n2_eff());
}

double PlusMinusState::eigenvalue(int n_plus) const {
    return (2.0 * n_plus - n_tot()) / cosphi_denom();
}

double PlusMinusState::norm2() const {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s;
}

void PlusMinusState::normalize() {
    double n = std::sqrt(norm2());
    if (n <= 0.0) throw Error("plus/minus state: cannot normalize zero vector");
    for (auto& a : amps) a /= n;
}

void PlusMinusState::validate(double tol) const {
    sector.validate();
    if (n_removed < 0 || n_removed > sector.n_tot())
        throw Error("plus/minus state: invalid removed-atom count");
    if (static_cast<int>(amps.size()) != n_tot() + 1)
        throw Error("plus/minus state: amplitude vector length != n_tot+1");
    if (std::abs(norm2() - 1.0) > tol)
        throw Error("plus/minus state: not normalized");
}

double NumberBasisState::norm2() const {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s;
}

void NumberBasisState::normalize() {
    double n = std::sqrt(norm2());
    if (n <= 0.0) throw Error("number state: cannot normalize zero vector");
    for (auto& a : amps) a /= n;
}

void NumberBasisState::validate(double tol) const {
    sector.validate();
    if (n_removed < 0 || n_removed > sector.n_tot())
        throw Error("number state: invalid removed-atom count");
    if (static_cast<int>(amps.size()) != n_tot() + 1)
        throw Error("number state: amplitude vector length != n_tot+1");
    if (std::abs(norm2() - 1.0) > tol)
        throw Error("number state: not normalized");
}

std::vector<double> cosphi_spectrum(const SectorSpec& sector) {
    sector.validate();
    if (sector.n1 == 0 || sector.n2 == 0)
        throw Error("cosphi spectrum: operator undefined for an empty component");
    const int T = sector.n_tot();
    const double denom = 2.0 * std::sqrt(static_cast<double>(sector.n1) *
                                         static_cast<double>(sector.n2));
    std::vector<double> ev(T + 1);
    for (int n = 0; n <= T; ++n) ev[n] = (2.0 * n - T) / denom;
    return ev;
}

void basis_row(int m, int T, std::vector<double>& out) {
    if (T < 0 || m < 0 || m > T) throw Error("basis_row: index out of range");
    out.assign(T + 1, 0.0);
    const double sgn = ((T - m) % 2 == 0) ? 1.0 : -1.0;
    const double logmag0 =
        0.5 * LogCombinatorics::log_binomial(T, m) - 0.5 * T * kLn2;
    if (T == 0) {
        out[0] = 1.0;
        return;
    }
    const double lam = m - 0.5 * T;
    const int half = T / 2;

    // v(n1) = mant * 2^e2; the block exponent keeps mantissas in
    // [1e-250, 1e250] while the recurrence climbs ~ sqrt(C(T,m)) dynamic range.
    int e2 = static_cast<int>(std::floor(logmag0 / kLn2));
    double mant_prev = sgn * std::exp(logmag0 - e2 * kLn2);  // v(0)
    double v0 = std::ldexp(mant_prev, e2);
    out[0] = (std::abs(v0) < kFlush) ? 0.0 : v0;

    double mant_cur = 2.0 * lam * mant_prev / std::sqrt(static_cast<double>(T));  // v(1)
    if (half >= 1) {
        double v1 = std::ldexp(mant_cur, e2);
        out[1] = (std::abs(v1) < kFlush) ? 0.0 : v1;
    }
    for (int n1 = 1; n1 < half; ++n1) {
        const double a = std::sqrt(static_cast<double>(n1) * (T - n1 + 1.0));
        const double b = std::sqrt((n1 + 1.0) * static_cast<double>(T - n1));
        const double nxt = (2.0 * lam * mant_cur - a * mant_prev) / b;
        mant_prev = mant_cur;
        mant_cur = nxt;
        const double mag = std::abs(mant_cur);
        if (mag > 1e250) {
            mant_cur = std::ldexp(mant_cur, -1000);
            mant_prev = std::ldexp(mant_prev, -1000);
            e2 += 1000;
        } else if (mag > 0.0 && mag < 1e-250) {
            mant_cur = std::ldexp(mant_cur, 1000);
            mant_prev = std::ldexp(mant_prev, 1000);
            e2 -= 1000;
        }
        const double v = std::ldexp(mant_cur, e2);
        out[n1 + 1] = (std::abs(v) < kFlush) ? 0.0 : v;
    }
    // mirror the left half through U[m][T-n1] = (-1)^(T-m) U[m][n1]
    for (int n1 = half + 1; n1 <= T; ++n1) out[n1] = sgn * out[T - n1];
}

PlusMinusState number_to_plusminus(const NumberBasisState& state) {
    state.validate();
    const int T = state.n_tot();
    PlusMinusState result{state.sector, state.n_removed, std::vector<cplx>(T + 1)};
    std::vector<double> row;
    for (int m = 0; m <= T; ++m) {
        basis_row(m, T, row);
        cplx acc = 0.0;
        for (int n1 = 0; n1 <= T; ++n1) acc += row[n1] * state.amps[n1];
        result.amps[m] = acc;
    }
    return result;
}

NumberBasisState plusminus_to_number(const PlusMinusState& state) {
    state.validate();
    const int T = state.n_tot();
    NumberBasisState result{state.sector, state.n_removed, std::vector<cplx>(T + 1, 0.0)};
    std::vector<double> row;
    for (int m = 0; m <= T; ++m) {
        const cplx w = state.amps[m];
        if (w == 0.0) continue;
        basis_row(m, T, row);
        for (int n1 = 0; n1 <= T; ++n1) result.amps[n1] += w * row[n1];
    }
    return result;
}

double cosphi_expectation(const PlusMinusState& state) {
    state.validate();
    double s = 0.0;
    for (int n = 0; n <= state.n_tot(); ++n)
        s += std::norm(state.amps[n]) * state.eigenvalue(n);
    return s;
}

PlusMinusState symmetric_pair_state(int n_per_level) {
    if (n_per_level < 1) throw Error("symmetric_pair_state: need at least one atom per level");
    const int N = n_per_level;
    PlusMinusState state{SectorSpec{N, N}, 0, std::vector<cplx>(2 * N + 1, 0.0)};
    const double lf_n = LogCombinatorics::log_factorial(N);
    for (int k = 0; k <= N; ++k) {
        const double logmag = -N * kLn2 + LogCombinatorics::log_binomial(N, k) +
                              0.5 * (LogCombinatorics::log_factorial(2 * k) +
                                     LogCombinatorics::log_factorial(2 * (N - k))) -
                              lf_n;
        const double sgn = ((N - k) % 2 == 0) ? 1.0 : -1.0;
        state.amps[2 * k] = sgn * std::exp(logmag);
    }
    state.normalize();  // closed form is unit-norm; this removes rounding drift
    return state;
}

PlusMinusState product_state_plusminus(const SectorSpec& sector) {
    sector.validate();
    const int T = sector.n_tot();
    PlusMinusState state{sector, 0, std::vector<cplx>(T + 1)};
    std::vector<double> col;
    basis_row(sector.n1, T, col);  // = column n1 by the transpose symmetry
    for (int m = 0; m <= T; ++m) state.amps[m] = col[m];
    state.normalize();
    return state;
}

}  // namespace mqs
