#pragma once
#include <complex>
#include <vector>

#include "mqs/errors.hpp"

namespace mqs {

using cplx = std::complex<double>;

// Shared table of ln(k!). Built once, grown on demand, read-only afterwards.
class LogCombinatorics {
public:
    // ln(n!)
    static double log_factorial(long n);
    // ln C(n, k)
    static double log_binomial(long n, long k);

private:
    static const std::vector<double>& table_(long need);
};

// Two trapped internal states with fixed atom numbers.
struct SectorSpec {
    int n1 = 0;
    int n2 = 0;

    int n_tot() const { return n1 + n2; }
    void validate() const;
};

// State of the trapped levels 1,2 expressed over the occupation n_plus of the
// symmetric mode b+ = (b1 + b2)/sqrt(2); n_minus = n_tot - n_plus is implied.
// cos(phi)^ = (b1^dag b2 + b2^dag b1) / (2 sqrt(N1 N2)) is diagonal here with
// eigenvalue (2 n_plus - n_tot) / (2 sqrt(N1 N2)).
//
// n_removed counts atoms outcoupled since preparation. The symmetric jump
// operator drains levels 1 and 2 evenly, so the current mean occupations are
// n1_eff = N1 - n_removed/2 and n2_eff = N2 - n_removed/2, and the eigenvalue
// denominator tracks the depleted sector (for N1 = N2 it stays exactly
// [-1, 1]).
struct PlusMinusState {
    SectorSpec sector;
    int n_removed = 0;
    std::vector<cplx> amps;  // index n_plus in [0, n_tot()]

    int n_tot() const { return sector.n_tot() - n_removed; }
    double n1_eff() const { return sector.n1 - 0.5 * n_removed; }
    double n2_eff() const { return sector.n2 - 0.5 * n_removed; }
    double cosphi_denom() const;
    double eigenvalue(int n_plus) const;

    double norm2() const;
    void normalize();
    void validate(double tol = 1e-10) const;
};

// Same subsystem in the Fock (number) basis of levels 1,2; index n1,
// n2 = n_tot - n1 implied.
struct NumberBasisState {
    SectorSpec sector;
    int n_removed = 0;
    std::vector<cplx> amps;  // index n1 in [0, n_tot()]

    int n_tot() const { return sector.n_tot() - n_removed; }
    double norm2() const;
    void normalize();
    void validate(double tol = 1e-10) const;
};

// All n_tot+1 eigenvalues of cos(phi)^, ascending.
std::vector<double> cosphi_spectrum(const SectorSpec& sector);

// One row (fixed n_plus = m) of the orthogonal change-of-basis matrix
// U[m][n1] = <m_+, (T-m)_- | n1, T-n1>, the Wigner-d matrix d^{T/2} at angle
// pi/2. Row m is the eigenvector of the tridiagonal 2*Jx matrix with exact
// eigenvalue 2m - T, seeded at n1 = 0 from the closed-form corner element in
// log scale and swept edge-to-middle with block-exponent rescaling (the
// stable growth direction); the right half follows from the mirror symmetry
// U[m][T-n1] = (-1)^(T-m) U[m][n1]. Entries below 1e-300 flush to exact zero.
void basis_row(int m, int T, std::vector<double>& out);

// Unitary basis changes, one streamed row at a time: O(T^2) work, O(T)
// scratch. Exact inverses of each other (U is orthogonal).
PlusMinusState number_to_plusminus(const NumberBasisState& state);
NumberBasisState plusminus_to_number(const PlusMinusState& state);

// sum_n |amps(n)|^2 * eigenvalue(n)
double cosphi_expectation(const PlusMinusState& state);

// Closed form of the product Fock state |N,N> in the +/- basis:
//   amp(2k) = (-1)^(N-k) 2^-N C(N,k) sqrt((2k)! (2N-2k)!) / N!
// (support only on even n_plus: all odd components vanish identically).
PlusMinusState symmetric_pair_state(int n_per_level);

// Any product Fock state |n1, n2> in the +/- basis. The basis-change matrix
// is symmetric in this sign convention (conjugating its antisymmetric
// generator by diag((-1)^n) flips the rotation sense, which cancels the
// (-1)^(T-m) row prefactor), so the needed column equals one row: O(T).
PlusMinusState product_state_plusminus(const SectorSpec& sector);

}  // namespace mqs
