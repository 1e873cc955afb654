#pragma once
#include <complex>
#include <utility>
#include <vector>

#include "mqs/fock.hpp"
#include "mqs/histogram.hpp"

namespace mqs {

// Parameters of the weak outcoupling pulse: a third mode is coupled to the
// superposition b_B = cos(alpha) b1 + sin(alpha) b2 with strength V for time t.
struct CouplingParams {
    double coupling = 0.0;  // V > 0
    double alpha = 0.0;     // mixing angle in (0, pi/2)
    double time = 0.0;      // pulse duration >= 0

    double vt() const { return coupling * time; }
    // Expected transferred population; exact for the quadratic generator.
    double mean_transferred(const SectorSpec& sector) const;
    // Throws ConfigError for out-of-range parameters and
    // UndepletedAssumptionViolated when the expected transfer exceeds 10% of
    // the smaller initial population.
    void validate(const SectorSpec& sector) const;
};

// Joint amplitudes over (n_plus, n0): n_plus counts quanta actually present in
// the symmetric mode after the pulse, n0 counts transferred quanta; the
// antisymmetric-mode occupation n_minus = n_tot - n_plus - n0 is implied.
// Amplitudes with n0 > n0_max are truncated; construction verifies the
// truncated tail is negligible.
struct JointState {
    SectorSpec sector;
    double alpha = 0.0;
    double vt_value = 0.0;
    int n0_max = 0;
    std::vector<std::complex<double>> amps;  // row n_plus, col n0

    int n_plus_max() const { return sector.n_tot(); }
    size_t idx(int n_plus, int n0) const {
        return static_cast<size_t>(n_plus) * (n0_max + 1) + n0;
    }
    std::complex<double>& at(int n_plus, int n0) { return amps[idx(n_plus, n0)]; }
    const std::complex<double>& at(int n_plus, int n0) const {
        return amps[idx(n_plus, n0)];
    }
    double norm2() const;
    // Checks unit norm (1e-9), the parity selection rule, and that the
    // probability remaining at n0 == n0_max is below 1e-10.
    void validate() const;
};

// Conditional distribution of the relative-phase observable given an observed
// transfer count. Support lists (eigenvalue, probability) pairs ascending in
// eigenvalue; the optional grid carries a density in phi on (-pi, pi),
// normalized so the rectangle sum over the grid is 1.
struct ConditionalPhaseDistribution {
    SectorSpec sector;
    int n0_observed = 0;
    std::vector<std::pair<double, double>> support;
    std::vector<double> phi_grid;
    std::vector<double> phi_density;
};

// Uniform midpoint grid on (-pi, pi); endpoints excluded.
std::vector<double> default_phi_grid(int size = 2048);

// Evolves |n1, n2, 0> under the outcoupling pulse. Uses an exact closed form
// for the symmetric case (alpha == pi/4, n1 == n2); otherwise expands the
// rotated creation-operator polynomial, which is capped (DimensionCap) at
// n_tot <= 150. n0_max < 0 selects an automatic cutoff from the transfer
// moments.
JointState evolve_general_alpha(const SectorSpec& sector, const CouplingParams& p,
                                int n0_max = -1);

// Marginal distribution of the transferred count n0.
CountHistogram n0_distribution(const JointState& state);

// Conditions on an observed n0 (probability below 1e-30 raises
// ZeroProbabilityOutcome). The returned state is expressed in the
// pre-depletion frame: the transferred quanta are counted back into the
// symmetric mode (index n_plus + n0, original sector), which is exact for
// symmetric coupling where every transferred quantum left the symmetric mode.
// Second element of the pair is the outcome probability.
std::pair<PlusMinusState, double> project_on_n0(const JointState& state, int n0);

// Exact conditional phase distribution for an observed n0, rendered on a phi
// grid via linear interpolation of the support probabilities in the
// eigenvalue variable and the cos-map Jacobian.
ConditionalPhaseDistribution conditional_phase_exact(const JointState& state,
                                                     int n0,
                                                     int phi_grid_size = 2048);

// Large-N Gaussian approximation to the conditional phase density,
// exp(-[n0 - N sin^2(Vt) (1 + cos phi)]^2 / (2 n0)), normalized on the grid.
// N is the common mode population; requires the symmetric configuration.
ConditionalPhaseDistribution gaussian_phase_approx(const SectorSpec& sector,
                                                   const CouplingParams& p, int n0,
                                                   const std::vector<double>& grid);

// Total variation distance between two densities on the same phi grid.
double total_variation_phi(const ConditionalPhaseDistribution& a,
                           const ConditionalPhaseDistribution& b);

// Leading-order transfer moments (mean, variance) for the symmetric
// configuration: mean = N sin^2(Vt), variance = N sin^2(Vt) cos^2(Vt)
// + N^2 sin^4(Vt) / 2. Anything else raises FormulaScopeError. Note the
// variance expression drops a subleading + N sin^4(Vt) / 2 term relative to
// the exact distribution variance.
std::pair<double, double> n0_moments(const SectorSpec& sector,
                                     const CouplingParams& p);

}  // namespace mqs
