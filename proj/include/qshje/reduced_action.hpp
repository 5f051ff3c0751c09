#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "qshje/core.hpp"
#include "qshje/product_basis.hpp"

namespace qshje {

/// A QSHJE solution: S0 = hbar arctan(psi1/psi2) + hbar l and
/// R = sqrt(psi1^2 + psi2^2), with (psi1, psi2) combined from the product
/// basis by the action parameters.
struct QshjeSolution {
    ProductBasis basis;
    ActionParams params;

    std::size_t dimension() const { return basis.dimension(); }
    const PhysicalConstants& constants() const { return basis.constants(); }

    double total_potential(const Point& p) const {
        double v = 0.0;
        for (std::size_t a = 0; a < dimension(); ++a) v += basis.spec().axes[a].potential(p[a]);
        return v;
    }
};

inline QshjeSolution make_qshje_solution(ProductBasis basis, ActionParams params) {
    if (params.nu.size() != basis.count())
        throw invalid_input("QshjeSolution: params length does not match basis count");
    return QshjeSolution{std::move(basis), std::move(params)};
}

namespace detail {

inline void require_phase_defined(const CombineEval& ce, const Point& p) {
    if (ce.psi1 == 0.0 && ce.psi2 == 0.0)
        throw undefined_phase("psi1 = psi2 = 0: phase undefined", {p.begin(), p.begin() + 3});
}

} // namespace detail

/// Principal-branch reduced action at one point:
/// S0 = hbar atan2(psi1, psi2) + hbar l.
inline double eval_s0(const QshjeSolution& sol, const Point& p) {
    CombineEval ce = combine(sol.basis, sol.params, p);
    detail::require_phase_defined(ce, p);
    return sol.constants().hbar * (std::atan2(ce.psi1, ce.psi2) + sol.params.l);
}

/// Reduced action along a sampling path, unwrapped to a continuous branch.
///
/// atan2 is 2*pi-periodic; successive samples are shifted by the multiple of
/// 2*pi that makes the increment smallest, which recovers the continuous
/// branch as long as the path is sampled finer than half a phase turn.
inline std::vector<double> eval_s0_path(const QshjeSolution& sol, const std::vector<Point>& path) {
    std::vector<double> out;
    out.reserve(path.size());
    const double hbar = sol.constants().hbar;
    double prev_angle = 0.0;
    double offset = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        CombineEval ce = combine(sol.basis, sol.params, path[k]);
        detail::require_phase_defined(ce, path[k]);
        double angle = std::atan2(ce.psi1, ce.psi2);
        if (k > 0) {
            double delta = angle - prev_angle;
            offset -= 2.0 * M_PI * std::round(delta / (2.0 * M_PI));
        }
        prev_angle = angle;
        out.push_back(hbar * (angle + offset + sol.params.l));
    }
    return out;
}

/// Branch-free conjugate momentum:
/// grad S0 = hbar (psi2 grad psi1 - psi1 grad psi2) / (psi1^2 + psi2^2).
/// Finite wherever (psi1, psi2) != (0, 0); smooth across zeros of psi2.
inline std::array<double, 3> grad_s0(const QshjeSolution& sol, const Point& p) {
    CombineEval ce = combine(sol.basis, sol.params, p);
    detail::require_phase_defined(ce, p);
    const double q = ce.psi1 * ce.psi1 + ce.psi2 * ce.psi2;
    std::array<double, 3> g{};
    for (std::size_t a = 0; a < sol.dimension(); ++a)
        g[a] = sol.constants().hbar * (ce.psi2 * ce.grad1[a] - ce.psi1 * ce.grad2[a]) / q;
    return g;
}

/// R = sqrt(psi1^2 + psi2^2) >= 0 (integration constant c fixed to 1).
inline double eval_r(const QshjeSolution& sol, const Point& p) {
    CombineEval ce = combine(sol.basis, sol.params, p);
    return std::hypot(ce.psi1, ce.psi2);
}

// ---------------------------------------------------------------------------
// QSHJE residuals
// ---------------------------------------------------------------------------

/// Normalized residuals of the coupled system at one point.
///
/// residual_qhje:  (1/2m)(grad S0)^2 - (hbar^2/2m) lap(R)/R + V - E, over the
///                 energy scale |E| + max|V|.
/// residual_continuity: div(R^2 grad S0), assembled analytically and
///                 normalized by the magnitude of its constituent terms.
/// scale: the energy scale used for residual_qhje.
struct ResidualReport {
    Point point{};
    double residual_qhje = 0.0;
    double residual_continuity = 0.0;
    double scale = 0.0;
};

namespace detail {

inline double energy_scale(const QshjeSolution& sol) {
    double vmax = 0.0;
    double span = 0.0;
    for (std::size_t a = 0; a < sol.dimension(); ++a) {
        vmax += sol.basis.spec().axes[a].potential.max_abs();
        span = std::max(span, sol.basis.axis_domain(a).length());
    }
    const PhysicalConstants& c = sol.constants();
    double floor = c.hbar * c.hbar / (2.0 * c.mass * span * span);
    return std::max(std::fabs(sol.basis.total_energy()) + vmax, floor);
}

} // namespace detail

inline ResidualReport residual_qshje(const QshjeSolution& sol, const Point& p) {
    CombineEval ce = combine(sol.basis, sol.params, p);
    detail::require_phase_defined(ce, p);
    const std::size_t d = sol.dimension();
    const PhysicalConstants& c = sol.constants();
    const double hbar = c.hbar, m = c.mass;

    const double q = ce.psi1 * ce.psi1 + ce.psi2 * ce.psi2;
    if (q == 0.0) throw undefined_phase("R = 0: point excluded from residuals", {p.begin(), p.begin() + 3});

    const double lap1 = ce.laplacian1();
    const double lap2 = ce.laplacian2();

    double grad1_sq = 0.0, grad2_sq = 0.0, grad_q_sq = 0.0, grads0_sq = 0.0, gradq_dot_grads0 = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        const double dq = 2.0 * (ce.psi1 * ce.grad1[a] + ce.psi2 * ce.grad2[a]);
        const double ds0 = hbar * (ce.psi2 * ce.grad1[a] - ce.psi1 * ce.grad2[a]) / q;
        grad1_sq += ce.grad1[a] * ce.grad1[a];
        grad2_sq += ce.grad2[a] * ce.grad2[a];
        grad_q_sq += dq * dq;
        grads0_sq += ds0 * ds0;
        gradq_dot_grads0 += dq * ds0;
    }

    // lap(R)/R = lap(q)/(2q) - |grad q|^2/(4 q^2) with q = psi1^2 + psi2^2
    const double lap_q = 2.0 * (grad1_sq + grad2_sq + ce.psi1 * lap1 + ce.psi2 * lap2);
    const double lapR_over_R = lap_q / (2.0 * q) - grad_q_sq / (4.0 * q * q);

    ResidualReport rep;
    rep.point = p;
    rep.scale = detail::energy_scale(sol);

    const double qhje = grads0_sq / (2.0 * m) - hbar * hbar / (2.0 * m) * lapR_over_R + sol.total_potential(p) -
                        sol.basis.total_energy();
    rep.residual_qhje = qhje / rep.scale;

    // div(R^2 grad S0) = grad q . grad S0 + q lap S0, with
    // lap S0 = hbar (psi2 lap psi1 - psi1 lap psi2)/q - (grad q . grad S0)/q
    const double cross = hbar * (ce.psi2 * lap1 - ce.psi1 * lap2);
    const double lap_s0 = cross / q - gradq_dot_grads0 / q;
    const double continuity = gradq_dot_grads0 + q * lap_s0;
    double f_tot = 0.0;
    for (std::size_t a = 0; a < d; ++a) f_tot += ce.axis_f[a];
    const double cont_scale = std::fabs(gradq_dot_grads0) + hbar * (std::fabs(ce.psi2 * lap1) + std::fabs(ce.psi1 * lap2)) +
                              hbar * std::fabs(f_tot) * q + 1e-300;
    rep.residual_continuity = continuity / cont_scale;
    return rep;
}

/// One-dimensional QSHJE in Schwarzian form: LHS - RHS of
///   (1/2m)(S0')^2 + V - E
///     = (hbar^2/4m) [ (3/2)(S0')^{-2}(S0'')^2 - (S0')^{-1} S0''' ],
/// normalized by the energy scale. Derivatives of S0 are assembled by chain
/// rule over psi derivatives; psi'' comes from the ODE and psi''' from its
/// x-derivative, which brings in V'.
inline double residual_1d_schwarzian(const QshjeSolution& sol, double x) {
    if (sol.dimension() != 1) throw invalid_input("residual_1d_schwarzian: 1D solutions only");
    const PhysicalConstants& c = sol.constants();
    const double hbar = c.hbar, m = c.mass;
    const Point p{x, 0.0, 0.0};
    CombineEval ce = combine(sol.basis, sol.params, p);
    detail::require_phase_defined(ce, p);

    const auto& axis = sol.basis.spec().axes[0];
    const double f = ce.axis_f[0];
    const double fp = 2.0 * m / (hbar * hbar) * axis.potential.derivative(x);

    const double p1 = ce.psi1, p2 = ce.psi2;
    const double d1 = ce.grad1[0], d2 = ce.grad2[0];
    const double dd1 = f * p1, dd2 = f * p2;
    const double ddd1 = fp * p1 + f * d1, ddd2 = fp * p2 + f * d2;

    const double q = p1 * p1 + p2 * p2;
    const double qp = 2.0 * (p1 * d1 + p2 * d2);
    const double qpp = 2.0 * (d1 * d1 + p1 * dd1 + d2 * d2 + p2 * dd2);
    const double w = d1 * p2 - p1 * d2;
    const double wp = dd1 * p2 - p1 * dd2;
    const double wpp = ddd1 * p2 + dd1 * d2 - d1 * dd2 - p1 * ddd2;

    if (w == 0.0)
        throw numerical_failure("residual_1d_schwarzian: S0' vanished to working precision at x = " + std::to_string(x), x);

    const double s1 = hbar * w / q;
    const double s2 = hbar * (wp / q - w * qp / (q * q));
    const double s3 = hbar * (wpp / q - 2.0 * wp * qp / (q * q) - w * qpp / (q * q) + 2.0 * w * qp * qp / (q * q * q));

    const double lhs = s1 * s1 / (2.0 * m) + axis.potential(x) - axis.energy;
    const double rhs = hbar * hbar / (4.0 * m) * (1.5 * sqr(s2 / s1) - s3 / s1);
    return (lhs - rhs) / detail::energy_scale(sol);
}

// ---------------------------------------------------------------------------
// S0 from a wave-function value (consistency route)
// ---------------------------------------------------------------------------

/// Principal-branch S0 recovered from Psi at a point via
///   S0 = hbar arctan( (|a|+|b|)/(|a|-|b|) * Im[e^{-i(a+b)/2} Psi]
///                                          / Re[e^{-i(a+b)/2} Psi] )
///        + hbar (b-a)/2.
/// Consistency check against eval_s0 modulo hbar*pi.
inline double extract_s0_from_wavefunction(std::complex<double> psi, double modulus_alpha, double modulus_beta,
                                           double a, double b, const PhysicalConstants& c) {
    if (!(modulus_alpha >= 0.0) || !(modulus_beta >= 0.0))
        throw invalid_input("extract_s0: moduli must be nonnegative");
    const double sum = modulus_alpha + modulus_beta;
    const double diff = modulus_alpha - modulus_beta;
    if (std::fabs(diff) <= 1e-14 * sum)
        throw degenerate_input("extract_s0: |alpha| = |beta| (real wave function case); S0 not extractable this way");
    const std::complex<double> rotated = std::exp(std::complex<double>(0.0, -0.5 * (a + b))) * psi;
    if (rotated.real() == 0.0)
        throw numerical_failure("extract_s0: zero denominator (branch point)");
    return c.hbar * (std::atan(sum / diff * rotated.imag() / rotated.real()) + 0.5 * (b - a));
}

} // namespace qshje
