#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qshje/core.hpp"
#include "qshje/potential.hpp"

namespace qshje {

inline constexpr std::size_t kDefaultGridNodes = 4001;

/// Two real, linearly independent solutions of the stationary 1D Schrodinger
/// equation at one energy, tabulated with first derivatives on a uniform grid.
///
/// wronskian_ref is psi1'psi2 - psi1 psi2', constant for any second-order
/// linear ODE without first-derivative term. max_wronskian_drift is the
/// normalized constancy defect measured over all nodes at construction.
struct BasisPair {
    std::vector<double> grid;
    std::vector<double> values1, deriv1;
    std::vector<double> values2, deriv2;
    double energy = 0.0;
    double wronskian_ref = 0.0;
    double max_wronskian_drift = 0.0;
    double worst_drift_x = 0.0;

    std::size_t size() const { return grid.size(); }
    double step() const { return grid[1] - grid[0]; }
    Interval domain() const { return Interval{grid.front(), grid.back()}; }
};

/// Values and first/second derivatives of both pair members at one point.
struct PairEval {
    double psi1, dpsi1, ddpsi1;
    double psi2, dpsi2, ddpsi2;
};

struct ScanReport {
    double max_normalized = 0.0;
    double worst_x = 0.0;
};

namespace detail {

// f(x) = (2m/hbar^2) (V(x) - E), so the ODE reads psi'' = f psi.
inline double schrodinger_f(const Potential1D& V, double energy, const PhysicalConstants& c, double x) {
    return 2.0 * c.mass / (c.hbar * c.hbar) * (V(x) - energy);
}

inline std::vector<double> sample_f(const Potential1D& V, double energy, const PhysicalConstants& c,
                                    const std::vector<double>& grid) {
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = schrodinger_f(V, energy, c, grid[i]);
    return f;
}

// Nodewise derivatives of the tabulated f, used only in small correction
// terms; clamped stencils at the edges are accurate enough for that role.
struct FDerivs {
    std::vector<double> f1, f2, f3;
};

inline FDerivs f_derivatives(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    FDerivs d;
    d.f1.assign(n, 0.0);
    d.f2.assign(n, 0.0);
    d.f3.assign(n, 0.0);
    auto at = [&](std::ptrdiff_t i) {
        return f[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1))];
    };
    for (std::size_t i = 0; i < n; ++i) {
        auto j = static_cast<std::ptrdiff_t>(i);
        // centered stencils, shifted inward at the boundary
        std::ptrdiff_t s = std::clamp<std::ptrdiff_t>(j, 2, static_cast<std::ptrdiff_t>(n) - 3);
        double fm2 = at(s - 2), fm1 = at(s - 1), f0 = at(s), fp1 = at(s + 1), fp2 = at(s + 2);
        double d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h);
        double d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h);
        double d3 = (-fm2 + 2 * fm1 - 2 * fp1 + fp2) / (2 * h * h * h);
        if (s != j) {
            // first-order transport of the derivative to the edge node
            double dx = (static_cast<double>(j) - static_cast<double>(s)) * h;
            d1 += dx * d2;
            d2 += dx * d3;
        }
        d.f1[i] = d1;
        d.f2[i] = d2;
        d.f3[i] = d3;
    }
    return d;
}

// Taylor step coefficients: psi(x0 + h) = C psi(x0) + D psi'(x0) + O(h^6),
// using psi'' = f psi and the chain of ODE-differentiated identities.
struct TaylorStep {
    double C, D;
};

inline TaylorStep taylor_step(double h, double f, double f1, double f2, double f3) {
    const double h2 = h * h, h3 = h2 * h, h4 = h3 * h, h5 = h4 * h;
    TaylorStep t;
    t.C = 1.0 + h2 * f / 2.0 + h3 * f1 / 6.0 + h4 * (f2 + f * f) / 24.0 + h5 * (f3 + 4.0 * f * f1) / 120.0;
    t.D = h + h3 * f / 6.0 + h4 * f1 / 12.0 + h5 * (3.0 * f2 + f * f) / 120.0;
    return t;
}

/// Numerov value propagation for psi'' = f psi from (psi0, dpsi0) at index 0.
inline std::vector<double> numerov_values(const std::vector<double>& f, double h, double psi0, double dpsi0,
                                          const FDerivs& fd) {
    const std::size_t n = f.size();
    std::vector<double> y(n);
    y[0] = psi0;
    if (n == 1) return y;
    TaylorStep t0 = taylor_step(h, f[0], fd.f1[0], fd.f2[0], fd.f3[0]);
    y[1] = t0.C * psi0 + t0.D * dpsi0;
    const double h2_12 = h * h / 12.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double a = 2.0 * y[i] * (1.0 + 5.0 * h2_12 * f[i]);
        double b = y[i - 1] * (1.0 - h2_12 * f[i - 1]);
        y[i + 1] = (a - b) / (1.0 - h2_12 * f[i + 1]);
    }
    return y;
}

// Derivative reconstruction from tabulated values. The centered difference is
// corrected with ODE-consistent h^3/h^5 terms, which keeps the truncation
// constant small even where f is large; the edge nodes invert the Taylor step.
inline std::vector<double> reconstruct_derivatives(const std::vector<double>& y, const std::vector<double>& f,
                                                   double h, const FDerivs& fd) {
    const std::size_t n = y.size();
    std::vector<double> dy(n);
    const double h3 = h * h * h, h5 = h3 * h * h;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double num = (y[i + 1] - y[i - 1]) - y[i] * (h3 / 3.0 * fd.f1[i] + h5 / 60.0 * (fd.f3[i] + 4.0 * f[i] * fd.f1[i]));
        double den = 2.0 * h + h3 / 3.0 * f[i] + h5 / 60.0 * (3.0 * fd.f2[i] + f[i] * f[i]);
        dy[i] = num / den;
    }
    {
        TaylorStep t = taylor_step(h, f[0], fd.f1[0], fd.f2[0], fd.f3[0]);
        dy[0] = (y[1] - t.C * y[0]) / t.D;
    }
    {
        std::size_t e = n - 1;
        TaylorStep t = taylor_step(-h, f[e], fd.f1[e], fd.f2[e], fd.f3[e]);
        dy[e] = (y[e - 1] - t.C * y[e]) / t.D;
    }
    return dy;
}

inline std::vector<double> uniform_grid(Interval dom, std::size_t n) {
    std::vector<double> g(n);
    const double h = dom.length() / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = dom.lo + h * static_cast<double>(i);
    g.back() = dom.hi;
    return g;
}

// Fill wronskian_ref and the drift diagnostics. The reference is taken at the
// best-conditioned node (smallest product magnitude); the drift at each node
// is normalized by max(|W_ref|, |psi1' psi2| + |psi1 psi2'|) so that the check
// stays meaningful where the products cancel catastrophically.
inline void scan_wronskian(BasisPair& p) {
    const std::size_t n = p.size();
    std::size_t best = 0;
    double best_mag = std::numeric_limits<double>::infinity();
    auto prod_mag = [&](std::size_t i) {
        return std::fabs(p.deriv1[i] * p.values2[i]) + std::fabs(p.values1[i] * p.deriv2[i]);
    };
    auto wr = [&](std::size_t i) { return p.deriv1[i] * p.values2[i] - p.values1[i] * p.deriv2[i]; };
    for (std::size_t i = 0; i < n; ++i) {
        double m = prod_mag(i);
        if (m < best_mag && wr(i) != 0.0) {
            best_mag = m;
            best = i;
        }
    }
    p.wronskian_ref = wr(best);
    double worst = 0.0;
    double worst_x = p.grid[best];
    for (std::size_t i = 0; i < n; ++i) {
        double denom = std::max(std::fabs(p.wronskian_ref), prod_mag(i));
        double drift = std::fabs(wr(i) - p.wronskian_ref) / std::max(denom, 1e-300);
        if (drift > worst) {
            worst = drift;
            worst_x = p.grid[i];
        }
    }
    p.max_wronskian_drift = worst;
    p.worst_drift_x = worst_x;
}

} // namespace detail

/// Per-node Wronskian constancy defect (normalized as in BasisPair docs).
inline ScanReport wronskian_scan(const BasisPair& p) {
    ScanReport r;
    r.max_normalized = p.max_wronskian_drift;
    r.worst_x = p.worst_drift_x;
    return r;
}

/// Discrete Schrodinger residual of a tabulated solution: 5-point second
/// difference against (V - E) psi, normalized by (|E| + max|V|) and the local
/// solution amplitude over the stencil.
inline ScanReport ode_residual_scan_values(const std::vector<double>& grid, const std::vector<double>& values,
                                           const Potential1D& V, double energy, const PhysicalConstants& c) {
    const std::size_t n = grid.size();
    if (n < 5) throw invalid_input("ode_residual_scan: need at least 5 nodes");
    const double h = grid[1] - grid[0];
    const double escale = std::fabs(energy) + V.max_abs();
    const double floor = c.hbar * c.hbar / (2.0 * c.mass * sqr(grid.back() - grid.front()));
    const double scale = std::max(escale, floor);
    ScanReport r;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        double d2 = (-values[i - 2] + 16 * values[i - 1] - 30 * values[i] + 16 * values[i + 1] - values[i + 2]) / (12 * h * h);
        double res = -c.hbar * c.hbar / (2.0 * c.mass) * d2 + (V(grid[i]) - energy) * values[i];
        double amp = 0.0;
        for (std::size_t k = i - 2; k <= i + 2; ++k) amp = std::max(amp, std::fabs(values[k]));
        double norm = std::fabs(res) / (scale * std::max(amp, 1e-300));
        if (norm > r.max_normalized) {
            r.max_normalized = norm;
            r.worst_x = grid[i];
        }
    }
    return r;
}

inline ScanReport ode_residual_scan(const BasisPair& p, const Potential1D& V, const PhysicalConstants& c) {
    ScanReport a = ode_residual_scan_values(p.grid, p.values1, V, p.energy, c);
    ScanReport b = ode_residual_scan_values(p.grid, p.values2, V, p.energy, c);
    return a.max_normalized >= b.max_normalized ? a : b;
}

/// Numerov integration of two independent solutions from the left edge with
/// initial conditions (1, 0) and (0, 1/L). Fourth-order values; derivatives
/// reconstructed at matching order.
///
/// Throws numerical_failure when the Wronskian constancy defect exceeds
/// drift_tol, carrying the worst node.
inline BasisPair solve_numerov(const Potential1D& V, double energy, const PhysicalConstants& c,
                               std::size_t n_nodes = kDefaultGridNodes, double drift_tol = 1e-8) {
    c.validate();
    if (n_nodes < 16) throw invalid_input("solve_numerov: n_nodes must be >= 16");
    if (!std::isfinite(energy)) throw invalid_input("solve_numerov: energy must be finite");
    V.validate_finite(n_nodes);

    BasisPair p;
    p.grid = detail::uniform_grid(V.domain(), n_nodes);
    p.energy = energy;
    const double h = p.grid[1] - p.grid[0];
    const double L = V.domain().length();

    std::vector<double> f = detail::sample_f(V, energy, c, p.grid);
    detail::FDerivs fd = detail::f_derivatives(f, h);

    p.values1 = detail::numerov_values(f, h, 1.0, 0.0, fd);
    p.values2 = detail::numerov_values(f, h, 0.0, 1.0 / L, fd);
    p.deriv1 = detail::reconstruct_derivatives(p.values1, f, h, fd);
    p.deriv2 = detail::reconstruct_derivatives(p.values2, f, h, fd);

    detail::scan_wronskian(p);
    if (p.max_wronskian_drift > drift_tol)
        throw numerical_failure("solve_numerov: Wronskian drift " + std::to_string(p.max_wronskian_drift) +
                                    " exceeds tolerance at x = " + std::to_string(p.worst_drift_x),
                                p.worst_drift_x);
    return p;
}

// ---------------------------------------------------------------------------
// Analytic catalog
// ---------------------------------------------------------------------------

enum class AnalyticKind { free, evanescent, harmonic_ground };

struct AnalyticSpec {
    AnalyticKind kind = AnalyticKind::free;
    Interval domain{0.0, 2.0 * M_PI};
    std::size_t n_nodes = kDefaultGridNodes;
    double energy = 0.5; ///< free and evanescent
    double v0 = 1.0;     ///< evanescent barrier height
    double omega = 1.0;  ///< harmonic_ground
};

/// Potential matching a catalog entry, for use in downstream residual checks.
inline Potential1D analytic_potential(const AnalyticSpec& s, const PhysicalConstants& c) {
    switch (s.kind) {
        case AnalyticKind::free:            return Potential1D::make_free(s.domain);
        case AnalyticKind::evanescent:      return Potential1D::make_constant(s.domain, s.v0);
        case AnalyticKind::harmonic_ground: return Potential1D::make_harmonic(s.domain, c.mass, s.omega);
    }
    throw invalid_input("unknown analytic kind");
}

inline double analytic_energy(const AnalyticSpec& s, const PhysicalConstants& c) {
    return s.kind == AnalyticKind::harmonic_ground ? 0.5 * c.hbar * s.omega : s.energy;
}

/// Closed-form basis pairs sampled on the grid:
///   free            (sin kx, cos kx),       k = sqrt(2mE)/hbar,        W = k
///   evanescent      (e^{kx}, e^{-kx}),      k = sqrt(2m(V0-E))/hbar,   W = 2k
///   harmonic_ground (g, g * I),             g the Gaussian ground state,
///                   I(x) = int_0^x g^{-2},  W = -1
/// The reduction-of-order integral I is accumulated with per-interval
/// Gauss-Legendre quadrature.
inline BasisPair analytic_pair(const AnalyticSpec& s, const PhysicalConstants& c) {
    c.validate();
    s.domain.validate();
    if (s.n_nodes < 16) throw invalid_input("analytic_pair: n_nodes must be >= 16");

    BasisPair p;
    p.grid = detail::uniform_grid(s.domain, s.n_nodes);
    const std::size_t n = s.n_nodes;
    p.values1.resize(n);
    p.deriv1.resize(n);
    p.values2.resize(n);
    p.deriv2.resize(n);
    p.energy = analytic_energy(s, c);

    switch (s.kind) {
        case AnalyticKind::free: {
            if (!(s.energy > 0.0)) throw invalid_input("analytic free pair needs E > 0");
            const double k = std::sqrt(2.0 * c.mass * s.energy) / c.hbar;
            for (std::size_t i = 0; i < n; ++i) {
                double x = p.grid[i];
                p.values1[i] = std::sin(k * x);
                p.deriv1[i] = k * std::cos(k * x);
                p.values2[i] = std::cos(k * x);
                p.deriv2[i] = -k * std::sin(k * x);
            }
            break;
        }
        case AnalyticKind::evanescent: {
            if (!(s.energy < s.v0)) throw invalid_input("evanescent pair needs E < V0");
            const double k = std::sqrt(2.0 * c.mass * (s.v0 - s.energy)) / c.hbar;
            const double reach = k * std::max(std::fabs(s.domain.lo), std::fabs(s.domain.hi));
            if (reach > 700.0) throw invalid_input("evanescent pair overflows on this domain");
            for (std::size_t i = 0; i < n; ++i) {
                double x = p.grid[i];
                p.values1[i] = std::exp(k * x);
                p.deriv1[i] = k * p.values1[i];
                p.values2[i] = std::exp(-k * x);
                p.deriv2[i] = -k * p.values2[i];
            }
            break;
        }
        case AnalyticKind::harmonic_ground: {
            if (!(s.omega > 0.0)) throw invalid_input("harmonic_ground pair needs omega > 0");
            const double a = c.mass * s.omega / c.hbar; // psi1 = exp(-a x^2 / 2)
            const double reach = 0.5 * a * sqr(std::max(std::fabs(s.domain.lo), std::fabs(s.domain.hi)));
            if (reach > 350.0) throw invalid_input("harmonic_ground pair overflows on this domain");

            // 7-point Gauss-Legendre nodes/weights on [-1, 1]
            static const std::array<double, 7> gx = {-0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
                                                     0.0, 0.4058451513773972, 0.7415311855993945, 0.9491079123427585};
            static const std::array<double, 7> gw = {0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
                                                     0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
                                                     0.1294849661688697};
            auto segment = [&](double u, double v) {
                double mid = 0.5 * (u + v), half = 0.5 * (v - u), acc = 0.0;
                for (std::size_t q = 0; q < gx.size(); ++q) acc += gw[q] * std::exp(a * sqr(mid + half * gx[q]));
                return acc * half;
            };

            // accumulate I(x) = int_0^x exp(a t^2) dt node to node, outward from the node nearest 0
            std::vector<double> I(n);
            std::size_t i0 = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (std::fabs(p.grid[i]) < std::fabs(p.grid[i0])) i0 = i;
            I[i0] = segment(0.0, p.grid[i0]);
            for (std::size_t i = i0 + 1; i < n; ++i) I[i] = I[i - 1] + segment(p.grid[i - 1], p.grid[i]);
            for (std::size_t i = i0; i-- > 0;) I[i] = I[i + 1] - segment(p.grid[i], p.grid[i + 1]);

            for (std::size_t i = 0; i < n; ++i) {
                double x = p.grid[i];
                double g = std::exp(-0.5 * a * x * x);
                p.values1[i] = g;
                p.deriv1[i] = -a * x * g;
                p.values2[i] = g * I[i];
                p.deriv2[i] = -a * x * g * I[i] + 1.0 / g;
            }
            break;
        }
    }

    detail::scan_wronskian(p);
    return p;
}

// ---------------------------------------------------------------------------
// Evaluation between nodes
// ---------------------------------------------------------------------------

/// Cubic Hermite evaluation of both members at x, with the second derivative
/// taken from the ODE identity psi'' = (2m/hbar^2)(V - E) psi rather than from
/// differentiating the interpolant.
inline PairEval eval_with_second_derivative(const BasisPair& p, const Potential1D& V, const PhysicalConstants& c,
                                            double x) {
    if (!p.domain().contains(x))
        throw invalid_input("eval: x = " + std::to_string(x) + " outside basis domain");
    const double h = p.step();
    std::size_t n = p.size();
    auto idx = static_cast<std::size_t>(std::min<double>(
        static_cast<double>(n - 2), std::max(0.0, std::floor((x - p.grid.front()) / h))));
    const double t = (x - p.grid[idx]) / h;

    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const double g00 = (6 * t2 - 6 * t) / h, g10 = 3 * t2 - 4 * t + 1;
    const double g01 = (-6 * t2 + 6 * t) / h, g11 = 3 * t2 - 2 * t;

    auto hermite = [&](const std::vector<double>& y, const std::vector<double>& dy, double& val, double& der) {
        val = h00 * y[idx] + h10 * h * dy[idx] + h01 * y[idx + 1] + h11 * h * dy[idx + 1];
        der = g00 * y[idx] + g10 * dy[idx] + g01 * y[idx + 1] + g11 * dy[idx + 1];
    };

    PairEval e{};
    hermite(p.values1, p.deriv1, e.psi1, e.dpsi1);
    hermite(p.values2, p.deriv2, e.psi2, e.dpsi2);
    const double f = detail::schrodinger_f(V, p.energy, c, x);
    e.ddpsi1 = f * e.psi1;
    e.ddpsi2 = f * e.psi2;
    return e;
}

// ---------------------------------------------------------------------------
// Bound-state energy by shooting (demo convenience)
// ---------------------------------------------------------------------------

namespace detail {

// Wronskian mismatch of the left- and right-launched decaying solutions at the
// match index, normalized; changes sign across an eigenvalue.
struct Shot {
    double mismatch;
    std::vector<double> assembled;
};

inline Shot shoot(const Potential1D& V, double energy, const PhysicalConstants& c, std::size_t n_nodes,
                  bool want_wave) {
    std::vector<double> grid = uniform_grid(V.domain(), n_nodes);
    const double h = grid[1] - grid[0];
    std::vector<double> f = sample_f(V, energy, c, grid);
    FDerivs fd = f_derivatives(f, h);

    // match at the rightmost classical turning point, falling back to mid-domain
    std::size_t m = n_nodes / 2;
    for (std::size_t i = n_nodes; i-- > 0;) {
        if (f[i] <= 0.0) { // V <= E
            m = i;
            break;
        }
    }
    m = std::clamp<std::size_t>(m, 4, n_nodes - 5);

    std::vector<double> yl = numerov_values(f, h, 0.0, 1.0, fd);

    // right-launched: integrate on the reversed axis
    std::vector<double> fr(f.rbegin(), f.rend());
    FDerivs fdr = f_derivatives(fr, h);
    std::vector<double> yr_rev = numerov_values(fr, h, 0.0, 1.0, fdr);
    std::vector<double> yr(yr_rev.rbegin(), yr_rev.rend());

    auto deriv_at = [&](const std::vector<double>& y, std::size_t i) {
        double num = (y[i + 1] - y[i - 1]) - y[i] * (h * h * h / 3.0 * fd.f1[i]);
        double den = 2.0 * h + h * h * h / 3.0 * f[i];
        return num / den;
    };

    double wl = yl[m], dl = deriv_at(yl, m);
    double wr = yr[m], dr = deriv_at(yr, m);
    double norm = std::fabs(dl * wr) + std::fabs(wl * dr);
    Shot s;
    s.mismatch = (dl * wr - wl * dr) / std::max(norm, 1e-300);
    if (want_wave) {
        s.assembled = yl;
        if (std::fabs(wr) > 1e-300) {
            double scale = wl / wr;
            for (std::size_t i = m; i < n_nodes; ++i) s.assembled[i] = yr[i] * scale;
        }
    }
    return s;
}

inline int count_interior_nodes(const std::vector<double>& y) {
    int nodes = 0;
    double prev = 0.0;
    // skip the clamped end zeros
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (y[i] == 0.0) continue;
        if (prev != 0.0 && std::signbit(prev) != std::signbit(y[i])) ++nodes;
        prev = y[i];
    }
    return nodes;
}

} // namespace detail

/// Bisection on the shooting mismatch for the eigenvalue inside `bracket`
/// whose eigenfunction has `node_count` interior sign changes. The bracket
/// must isolate one eigenvalue; a wrong node count is detected post hoc.
inline double find_bound_energy(const Potential1D& V, const PhysicalConstants& c, int node_count, Interval bracket,
                                std::size_t n_nodes = kDefaultGridNodes) {
    c.validate();
    bracket.validate();
    double ea = bracket.lo, eb = bracket.hi;
    double fa = detail::shoot(V, ea, c, n_nodes, false).mismatch;
    double fb = detail::shoot(V, eb, c, n_nodes, false).mismatch;
    if (std::signbit(fa) == std::signbit(fb))
        throw numerical_failure("find_bound_energy: no eigenvalue detected in bracket [" + std::to_string(ea) + ", " +
                                std::to_string(eb) + "]");
    for (int it = 0; it < 200 && (eb - ea) > 1e-13 * std::max(1.0, std::fabs(ea)); ++it) {
        double em = 0.5 * (ea + eb);
        double fm = detail::shoot(V, em, c, n_nodes, false).mismatch;
        if (std::signbit(fm) == std::signbit(fa)) {
            ea = em;
            fa = fm;
        } else {
            eb = em;
        }
    }
    double e = 0.5 * (ea + eb);
    auto final_shot = detail::shoot(V, e, c, n_nodes, true);
    int found = detail::count_interior_nodes(final_shot.assembled);
    if (found != node_count)
        throw numerical_failure("find_bound_energy: converged state has " + std::to_string(found) +
                                " nodes, requested " + std::to_string(node_count) + " (bad bracket?)");
    return e;
}

} // namespace qshje
