#include "mqs/collapse.hpp"

#include <algorithm>
#include <cmath>

namespace mqs {
namespace collapse {

namespace {
constexpr double kTwoPi = 6.283185307179586;

// linear interpolation of a sampled array at x
template <typename T>
T interp(const std::vector<double>& grid, const std::vector<T>& vals, double x) {
    if (grid.size() < 2) throw Error("interpolation: grid too short");
    if (x <= grid.front()) return vals.front();
    if (x >= grid.back()) return vals.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double w = (x - grid[i]) / (grid[i + 1] - grid[i]);
    return vals[i] * (1.0 - w) + vals[i + 1] * w;
}

void check_boundary(const Wavefunction1D& psi) {
    double peak = 0.0;
    for (const auto& a : psi.amplitudes) peak = std::max(peak, std::abs(a));
    const double edge = std::max(std::abs(psi.amplitudes.front()), std::abs(psi.amplitudes.back()));
    if (edge >= 1e-8 * peak)
        throw GridTooSmall("collapse: output amplitude at the grid boundary is not negligible; enlarge the grid");
}
}  // namespace

double Wavefunction1D::dx() const {
    if (grid.size() < 2) throw Error("wavefunction: need at least two grid points");
    return grid[1] - grid[0];
}

double Wavefunction1D::norm2() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s * dx();
}

void Wavefunction1D::normalize() {
    const double n = std::sqrt(norm2());
    if (n <= 0.0) throw ZeroOverlap("wavefunction: cannot normalize zero vector");
    for (auto& a : amplitudes) a /= n;
}

void Wavefunction1D::validate() const {
    if (grid.size() < 2 || grid.size() != amplitudes.size())
        throw Error("wavefunction: grid/amplitude size mismatch");
    const double h = grid[1] - grid[0];
    if (h <= 0.0) throw Error("wavefunction: grid must be strictly increasing");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double hi = grid[i] - grid[i - 1];
        if (std::abs(hi - h) > 1e-12 * std::abs(h))
            throw Error("wavefunction: grid spacing not uniform to 1e-12 relative");
    }
    if (std::abs(norm2() - 1.0) > norm_tol)
        throw Error("wavefunction: not normalized within norm_tol");
}

double DetectorKernel::operator()(double y) const {
    if (shape == Shape::gaussian)
        return std::exp(-0.5 * y * y / (width * width)) / (width * std::sqrt(kTwoPi));
    return (std::abs(y) <= width) ? 0.5 / width : 0.0;
}

void DetectorKernel::validate() const {
    if (!(width > 0.0)) throw Error("detector kernel: width must be positive");
}

MeasuredFunction MeasuredFunction::sample(const std::vector<double>& grid,
                                          const std::function<double(double)>& f) {
    MeasuredFunction m;
    m.f_vals.reserve(grid.size());
    for (double x : grid) m.f_vals.push_back(f(x));
    m.fprime_vals.assign(grid.size(), 0.0);
    const double h = grid[1] - grid[0];
    for (std::size_t i = 1; i + 1 < grid.size(); ++i)
        m.fprime_vals[i] = (m.f_vals[i + 1] - m.f_vals[i - 1]) / (2.0 * h);
    m.fprime_vals.front() = (m.f_vals[1] - m.f_vals[0]) / h;
    m.fprime_vals.back() = (m.f_vals[grid.size() - 1] - m.f_vals[grid.size() - 2]) / h;
    return m;
}

MeasuredFunction MeasuredFunction::sample(const std::vector<double>& grid,
                                          const std::function<double(double)>& f,
                                          const std::function<double(double)>& fprime) {
    MeasuredFunction m = sample(grid, f);
    std::vector<double> analytic;
    analytic.reserve(grid.size());
    for (double x : grid) analytic.push_back(fprime(x));
    double scale = 0.0;
    for (double v : analytic) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) scale = 1.0;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        // central differences carry O(h^2 f''') truncation error; the 1e-6
        // consistency requirement is relative to the derivative scale
        const double tol = 1e-6 * std::max(std::abs(analytic[i]), scale);
        if (std::abs(analytic[i] - m.fprime_vals[i]) > tol)
            throw Error("measured function: analytic derivative disagrees with central differences");
    }
    m.fprime_vals = std::move(analytic);
    return m;
}

double MeasuredFunction::f_at(const std::vector<double>& grid, double x) const {
    return interp(grid, f_vals, x);
}

double MeasuredFunction::fprime_at(const std::vector<double>& grid, double x) const {
    return interp(grid, fprime_vals, x);
}

Wavefunction1D collapse(const Wavefunction1D& psi_in, const MeasuredFunction& f,
                        const DetectorKernel& g) {
    psi_in.validate();
    g.validate();
    if (!(g.width > 2.0 * psi_in.dx()))
        throw KernelUnderresolved("collapse: kernel width must exceed twice the grid spacing");
    if (f.f_vals.size() != psi_in.grid.size())
        throw Error("collapse: measured function sampled on a different grid");

    Wavefunction1D out = psi_in;
    for (std::size_t i = 0; i < out.grid.size(); ++i)
        out.amplitudes[i] = psi_in.amplitudes[i] * g(f.f_vals[i] - g.center);
    if (out.norm2() < 1e-30)
        throw ZeroOverlap("collapse: measurement outcome incompatible with the state");
    out.normalize();
    check_boundary(out);
    return out;
}

Wavefunction1D two_peak_approximation(const Wavefunction1D& psi_in, const MeasuredFunction& f,
                                      const DetectorKernel& g, const std::vector<double>& roots) {
    psi_in.validate();
    g.validate();
    if (roots.empty()) throw Error("two-peak approximation: need at least one root");
    for (double r : roots)
        if (std::abs(f.fprime_at(psi_in.grid, r)) < 1e-9)
            throw DegenerateRoot("two-peak approximation: f' vanishes at a root; linearization invalid");

    Wavefunction1D out = psi_in;
    std::fill(out.amplitudes.begin(), out.amplitudes.end(), cplx{0.0, 0.0});
    for (double r : roots) {
        const cplx w = interp(psi_in.grid, psi_in.amplitudes, r);
        const double slope = f.fprime_at(psi_in.grid, r);
        for (std::size_t i = 0; i < out.grid.size(); ++i)
            out.amplitudes[i] += w * g(slope * (out.grid[i] - r));
    }
    if (out.norm2() < 1e-30)
        throw ZeroOverlap("two-peak approximation: vanishing weight at every root");
    out.normalize();
    check_boundary(out);
    return out;
}

bool peaks_resolved(const Wavefunction1D& psi_out, const DetectorKernel& g,
                    const std::vector<double>& roots, const MeasuredFunction& f) {
    psi_out.validate();
    if (roots.size() < 2) throw Error("peaks_resolved: need at least two roots");
    std::vector<double> sorted = roots;
    std::sort(sorted.begin(), sorted.end());
    const double g0 = g(0.0);
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const double s = 0.5 * (sorted[i + 1] - sorted[i]);
        for (double r : {sorted[i], sorted[i + 1]}) {
            const double ratio = g(s * std::abs(f.fprime_at(psi_out.grid, r))) / g0;
            if (!(ratio < 0.01)) return false;
        }
    }
    return true;
}

double l2_distance(const Wavefunction1D& a, const Wavefunction1D& b) {
    if (a.grid.size() != b.grid.size()) throw Error("l2_distance: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
        s += std::norm(a.amplitudes[i] - b.amplitudes[i]);
    return std::sqrt(s * a.dx());
}

double overlap(const Wavefunction1D& a, const Wavefunction1D& b) {
    if (a.grid.size() != b.grid.size()) throw Error("overlap: grid mismatch");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
        s += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    return std::abs(s) * a.dx();
}

}  // namespace collapse
}  // namespace mqs
