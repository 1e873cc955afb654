#include "mqs/oracle.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace mqs {
namespace oracle {

void DenseFockSpace::validate() const {
    if (n1_max < 0 || n2_max < 0 || n0_max < 0)
        throw Error("dense space: negative truncation");
    if (dim() > 1000000L)
        throw DimensionCap("dense space: more than 1e6 basis states requested");
}

DenseState dense_unitary_evolve(int n1_init, int n2_init, double V1, double V2, double t) {
    if (n1_init < 0 || n2_init < 0)
        throw Error("dense evolve: negative initial occupation");
    const int N = n1_init + n2_init;
    DenseFockSpace space{N, N, N};
    space.validate();
    const long d = space.dim();

    // A = H / (-i hbar) restricted to the grid: real antisymmetric.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
    auto add_hop = [&](double v, int from_level) {
        // v * (b0^dag b_from - b_from^dag b0)
        for (int n1 = 0; n1 <= N; ++n1)
            for (int n2 = 0; n2 + n1 <= N; ++n2)
                for (int n0 = 0; n0 + n1 + n2 <= N; ++n0) {
                    const long i = space.index(n1, n2, n0);
                    const int nf = (from_level == 1) ? n1 : n2;
                    if (nf >= 1 && n0 + 1 <= N) {
                        const double amp = v * std::sqrt(static_cast<double>(nf) * (n0 + 1));
                        const long j = (from_level == 1) ? space.index(n1 - 1, n2, n0 + 1)
                                                         : space.index(n1, n2 - 1, n0 + 1);
                        A(j, i) += amp;
                        A(i, j) -= amp;
                    }
                }
    };
    add_hop(V1, 1);
    add_hop(V2, 2);

    Eigen::VectorXd psi = Eigen::VectorXd::Zero(d);
    psi[space.index(n1_init, n2_init, 0)] = 1.0;
    Eigen::MatrixXd U = (A * t).exp();
    DenseState out{space, U * psi};
    if (std::abs(out.amps.squaredNorm() - 1.0) > 1e-12)
        throw Error("dense evolve: norm not conserved");
    return out;
}

Eigen::MatrixXd dense_pair_exchange_matrix(int T) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(T + 1, T + 1);
    for (int n1 = 0; n1 < T; ++n1) {
        // <n1+1, n2-1| b1^dag b2 |n1, n2> with n2 = T - n1
        const double amp = std::sqrt((n1 + 1.0) * (T - n1));
        M(n1 + 1, n1) = amp;
        M(n1, n1 + 1) = amp;
    }
    return M;
}

Eigen::MatrixXd dense_pm_transform(int T) {
    if (T > 40)
        throw DimensionCap("dense pm transform: alternating sums unreliable past T=40");
    Eigen::MatrixXd U(T + 1, T + 1);
    for (int m = 0; m <= T; ++m) {
        for (int n1 = 0; n1 <= T; ++n1) {
            const int n2 = T - n1;
            // coefficient of b1^dag^n1 b2^dag^n2 in (b1+b2)^m (b1-b2)^(T-m)
            double s = 0.0;
            for (int k = std::max(0, m - n2); k <= std::min(n1, m); ++k) {
                const double term = std::exp(LogCombinatorics::log_binomial(n1, k) +
                                             LogCombinatorics::log_binomial(n2, m - k));
                s += (((n2 - (m - k)) % 2 == 0) ? term : -term);
            }
            U(m, n1) = s * std::exp(-0.5 * T * std::log(2.0) +
                                    0.5 * (LogCombinatorics::log_factorial(m) +
                                           LogCombinatorics::log_factorial(T - m) -
                                           LogCombinatorics::log_factorial(n1) -
                                           LogCombinatorics::log_factorial(n2)));
        }
    }
    return U;
}

Eigen::MatrixXd dense_pm_transform_expm(int T) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(T + 1, T + 1);
    for (int n1 = 0; n1 < T; ++n1) {
        const double amp = std::sqrt((n1 + 1.0) * (T - n1));
        G(n1 + 1, n1) += amp;   // b1^dag b2
        G(n1, n1 + 1) -= amp;   // -b2^dag b1
    }
    Eigen::MatrixXd R = (G * (std::atan(1.0))).exp();  // exp((pi/4) G)
    for (int m = 0; m <= T; ++m)
        if ((T - m) % 2 != 0) R.row(m) *= -1.0;
    return R;
}

namespace {

// d rho / dt for c = sqrt(W)(b1 + b2) on the truncated two-mode grid.
Eigen::MatrixXd dissipator(const Eigen::MatrixXd& rho, int n1_max, int n2_max, double W) {
    const long d = rho.rows();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
    const double sw = std::sqrt(W);
    for (int n1 = 0; n1 <= n1_max; ++n1)
        for (int n2 = 0; n2 <= n2_max; ++n2) {
            const long i = two_mode_index(n1, n2, n2_max);
            if (n1 >= 1) c(two_mode_index(n1 - 1, n2, n2_max), i) += sw * std::sqrt(static_cast<double>(n1));
            if (n2 >= 1) c(two_mode_index(n1, n2 - 1, n2_max), i) += sw * std::sqrt(static_cast<double>(n2));
        }
    Eigen::MatrixXd cdc = c.transpose() * c;
    return c * rho * c.transpose() - 0.5 * (cdc * rho + rho * cdc);
}

Eigen::MatrixXd rk4_step(const Eigen::MatrixXd& rho, int n1_max, int n2_max, double W, double h) {
    Eigen::MatrixXd k1 = dissipator(rho, n1_max, n2_max, W);
    Eigen::MatrixXd k2 = dissipator(rho + 0.5 * h * k1, n1_max, n2_max, W);
    Eigen::MatrixXd k3 = dissipator(rho + 0.5 * h * k2, n1_max, n2_max, W);
    Eigen::MatrixXd k4 = dissipator(rho + h * k3, n1_max, n2_max, W);
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Eigen::MatrixXd lindblad_evolve(const Eigen::MatrixXd& rho0, int n1_max, int n2_max,
                                double W, double t, double tol) {
    const long d = static_cast<long>(n1_max + 1) * (n2_max + 1);
    if (d * d > 1000000L)
        throw DimensionCap("lindblad: density matrix larger than 1e6 entries");
    if (rho0.rows() != d || rho0.cols() != d)
        throw Error("lindblad: density matrix does not match the grid");
    if (t < 0.0) throw Error("lindblad: negative time");
    if (t == 0.0 || W == 0.0) return rho0;

    // Per-step error budget: tol is per unit of the dimensionless W t.
    const double total_budget = tol * W * t;
    Eigen::MatrixXd rho = rho0;
    double remaining = t;
    double h = std::min(t, 0.05 / W);
    const double hmin = t * 1e-12;
    while (remaining > 0.0) {
        if (h > remaining) h = remaining;
        Eigen::MatrixXd full = rk4_step(rho, n1_max, n2_max, W, h);
        Eigen::MatrixXd half = rk4_step(rk4_step(rho, n1_max, n2_max, W, 0.5 * h),
                                        n1_max, n2_max, W, 0.5 * h);
        const double err = (full - half).cwiseAbs().maxCoeff();
        const double budget = total_budget * (h / t);
        if (err <= budget || h <= hmin) {
            if (err > budget && h <= hmin)
                throw StepControlFailure("lindblad: step size underflow before reaching tolerance");
            rho = half;  // the two-half-step result is the more accurate one
            remaining -= h;
            if (err < 0.1 * budget) h *= 2.0;
        } else {
            h *= 0.5;
        }
    }
    if (std::abs(rho.trace() - rho0.trace()) > 1e-9)
        throw Error("lindblad: trace drifted beyond 1e-9");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (rho + rho.transpose()));
    if (es.eigenvalues().minCoeff() < -1e-9)
        throw Error("lindblad: final state lost positivity");
    return rho;
}

}  // namespace oracle
}  // namespace mqs
