#pragma once
#include <Eigen/Dense>
#include <vector>

#include "mqs/errors.hpp"
#include "mqs/fock.hpp"

namespace mqs {
namespace oracle {

// Brute-force dense references for every fast path, valid only at tiny atom
// numbers. All of these favour transparency over speed.

// Truncated three-mode Fock grid (levels 1, 2, 0).
struct DenseFockSpace {
    int n1_max = 0;
    int n2_max = 0;
    int n0_max = 0;

    long dim() const {
        return static_cast<long>(n1_max + 1) * (n2_max + 1) * (n0_max + 1);
    }
    long index(int n1, int n2, int n0) const {
        return (static_cast<long>(n1) * (n2_max + 1) + n2) * (n0_max + 1) + n0;
    }
    void validate() const;  // DimensionCap above 1e6 basis states
};

struct DenseState {
    DenseFockSpace space;
    Eigen::VectorXd amps;  // the generator is real, so amplitudes stay real
};

// exp(-i H t) |n1_init, n2_init, 0> with
// H = i hbar [V1 (b0^dag b1 - b1^dag b0) + V2 (b0^dag b2 - b2^dag b0)],
// hbar = 1. The propagator equals exp(A t) with A real antisymmetric, so the
// matrix exponential is real orthogonal: norm and total number are conserved
// to machine precision. The grid spans the full reachable set
// (all n <= n1_init + n2_init).
DenseState dense_unitary_evolve(int n1_init, int n2_init, double V1, double V2, double t);

// Dense (T+1)x(T+1) matrix of b1^dag b2 + b2^dag b1 on the fixed-total
// sector, indexed by n1.
Eigen::MatrixXd dense_pair_exchange_matrix(int T);

// Dense number -> plus/minus change of basis, U(m, n1) = <m_+|n1>, by direct
// polynomial expansion of (b+^dag)^m (b-^dag)^(T-m) |vac>. The alternating
// inner sum cancels significantly, so this reference is restricted to small T.
Eigen::MatrixXd dense_pm_transform(int T);

// Same matrix built a second, independent way: the beam-splitter image
// (-1)^(T-m) [exp((pi/4) G)](m, n1) with G the sector matrix of
// b1^dag b2 - b2^dag b1.
Eigen::MatrixXd dense_pm_transform_expm(int T);

// Two-mode density-matrix evolution under the pure-jump dissipator
//   d rho / dt = c rho c^dag - 1/2 {c^dag c, rho},   c = sqrt(W) (b1 + b2),
// on the (n1 <= n1_max) x (n2 <= n2_max) grid. 4th-order integrator with
// step-doubling control; target accuracy tol per unit of W t. The trace is
// checked to 1e-9 and the final state is eigen-checked for positivity.
Eigen::MatrixXd lindblad_evolve(const Eigen::MatrixXd& rho0, int n1_max, int n2_max,
                                double W, double t, double tol = 1e-10);

// Flat index for the two-mode grid used by lindblad_evolve.
inline long two_mode_index(int n1, int n2, int n2_max) {
    return static_cast<long>(n1) * (n2_max + 1) + n2;
}

}  // namespace oracle
}  // namespace mqs
