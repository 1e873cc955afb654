#pragma once
#include <complex>
#include <functional>
#include <vector>

#include "mqs/errors.hpp"

namespace mqs {
namespace collapse {

using cplx = std::complex<double>;

// A pure state sampled on a uniform 1-D grid of the collective variable x.
struct Wavefunction1D {
    std::vector<double> grid;       // strictly increasing, uniform spacing
    std::vector<cplx> amplitudes;   // psi(x) at the grid points
    double norm_tol = 1e-10;

    double dx() const;
    double norm2() const;           // sum |psi|^2 dx
    void normalize();
    void validate() const;          // uniformity (1e-12 relative) + norm
};

// Narrow detector response g(y): even, maximal at y = 0.
struct DetectorKernel {
    enum class Shape { gaussian, boxcar };
    double center = 0.0;  // measurement outcome f0
    double width = 1.0;   // gaussian: std dev; boxcar: half-width
    Shape shape = Shape::gaussian;

    double operator()(double y) const;
    void validate() const;
};

// The measured non-monotonous observable f(x) sampled on the same grid as the
// wavefunction, together with its derivative (analytic or by central
// differences). Analytic derivatives are verified against central differences
// to 1e-6 relative (scaled by max |f'| where f' passes through zero).
struct MeasuredFunction {
    std::vector<double> f_vals;
    std::vector<double> fprime_vals;

    static MeasuredFunction sample(const std::vector<double>& grid,
                                   const std::function<double(double)>& f);
    static MeasuredFunction sample(const std::vector<double>& grid,
                                   const std::function<double(double)>& f,
                                   const std::function<double(double)>& fprime);

    double f_at(const std::vector<double>& grid, double x) const;
    double fprime_at(const std::vector<double>& grid, double x) const;
};

// psi_out(x) ~ psi_in(x) g[f(x) - f0], normalized.
Wavefunction1D collapse(const Wavefunction1D& psi_in, const MeasuredFunction& f,
                        const DetectorKernel& g);

// Linearized kernel-image sum around the roots of f(x) = f0 (any root count):
// psi(x) ~ sum_r psi_in(r) g[f'(r) (x - r)], normalized.
Wavefunction1D two_peak_approximation(const Wavefunction1D& psi_in, const MeasuredFunction& f,
                                      const DetectorKernel& g, const std::vector<double>& roots);

// True iff for every adjacent root pair, with s the half separation,
// g(s |f'(root)|) / g(0) < 0.01 at both roots of the pair.
bool peaks_resolved(const Wavefunction1D& psi_out, const DetectorKernel& g,
                    const std::vector<double>& roots, const MeasuredFunction& f);

// L2 distance between two wavefunctions on the same grid.
double l2_distance(const Wavefunction1D& a, const Wavefunction1D& b);

// |<a|b>| on the shared grid.
double overlap(const Wavefunction1D& a, const Wavefunction1D& b);

}  // namespace collapse
}  // namespace mqs
