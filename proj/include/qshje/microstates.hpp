#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qshje/core.hpp"
#include "qshje/invariance.hpp"
#include "qshje/product_basis.hpp"

namespace qshje {

/// Complex coefficients of Psi = sum c_i phi_i in the product basis.
using CoefficientVector = std::vector<std::complex<double>>;

enum class MicrostateCase { complex_unique, real_family };

/// Outcome of identifying QSHJE parameters from wave-function coefficients.
///
/// In the complex case (|alpha| != |beta|) the parameter set is unique. In the
/// real case every nu entry except the gauge anchor is undetermined: one wave
/// function corresponds to a whole family of reduced actions (microstates).
///
/// global_phase is the theta used for phase alignment: the structured form is
/// e^{-i theta} c, so composing the recovered parameters and rotating back by
/// e^{i theta} reproduces the input.
struct MicrostateResult {
    MicrostateCase kind = MicrostateCase::complex_unique;
    double modulus_alpha = 0.0;
    double modulus_beta = 0.0;
    std::vector<double> mu;
    std::vector<std::optional<double>> nu;
    std::size_t family_dimension = 0;
    double global_phase = 0.0;
    NormalizationGauge gauge{0, 0};
    double condition = 0.0; ///< (|alpha|+|beta|) / ||alpha|-|beta||
};

inline double coeff_norm(const CoefficientVector& c) {
    double s = 0.0;
    for (const auto& z : c) s += std::norm(z);
    return std::sqrt(s);
}

inline CoefficientVector rotate_phase(const CoefficientVector& c, double theta) {
    CoefficientVector out(c.size());
    const std::complex<double> w = std::exp(std::complex<double>(0.0, -theta));
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = w * c[i];
    return out;
}

/// c_i = mu_i (|alpha|+|beta|) + i nu_i (|alpha|-|beta|), the identification
/// structure of a normalized parameter set (anchor entries nu_p = mu_q = 1).
inline CoefficientVector compose_coefficients(const ActionParams& params, double modulus_alpha, double modulus_beta,
                                              NormalizationGauge gauge = {0, static_cast<std::size_t>(-1)}) {
    if (!(modulus_alpha >= 0.0) || !(modulus_beta >= 0.0))
        throw invalid_input("compose_coefficients: moduli must be nonnegative");
    if (modulus_alpha == 0.0 && modulus_beta == 0.0)
        throw invalid_input("compose_coefficients: moduli must not both vanish");
    const std::size_t n = params.nu.size();
    if (gauge.mu_anchor == static_cast<std::size_t>(-1)) gauge = default_gauge(n);
    if (std::fabs(params.nu[gauge.nu_anchor] - 1.0) > 1e-12 || std::fabs(params.mu[gauge.mu_anchor] - 1.0) > 1e-12)
        throw invalid_input("compose_coefficients: params must be normalized in the given gauge");
    const double s = modulus_alpha + modulus_beta;
    const double d = modulus_alpha - modulus_beta;
    CoefficientVector c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = std::complex<double>(params.mu[i] * s, params.nu[i] * d);
    return c;
}

struct RealCaseCheck {
    bool is_real = false;
    double phase = 0.0;          ///< theta aligning c to a real vector
    double imag_residual = 0.0;  ///< ||Im e^{-i theta} c|| / ||c||
};

/// Is c a real vector up to one global phase? The aligning phase minimizes the
/// total squared imaginary part; in closed form theta = arg(sum c_i^2) / 2.
inline RealCaseCheck is_real_case(const CoefficientVector& c, double tol = 1e-9) {
    const double norm = coeff_norm(c);
    if (norm == 0.0) throw invalid_input("is_real_case: zero coefficient vector");
    std::complex<double> second_moment(0.0, 0.0);
    for (const auto& z : c) second_moment += z * z;

    RealCaseCheck out;
    out.phase = std::abs(second_moment) > 0.0 ? 0.5 * std::arg(second_moment) : 0.0;
    CoefficientVector r = rotate_phase(c, out.phase);
    double im = 0.0;
    for (const auto& z : r) im += z.imag() * z.imag();
    out.imag_residual = std::sqrt(im) / norm;
    out.is_real = out.imag_residual <= tol;
    return out;
}

namespace detail {

struct StructuredView {
    double theta;
    double S; ///< |alpha| + |beta| = Re c'_q
    double D; ///< |alpha| - |beta| = Im c'_p
    NormalizationGauge gauge;
};

// Try to read off (S, D) at the given phase and anchors; reject combinations
// that would need a negative modulus or an unstable nu split.
inline std::optional<StructuredView> try_view(const CoefficientVector& c, double theta, std::size_t p, std::size_t q,
                                              double tol) {
    const std::complex<double> wp = std::exp(std::complex<double>(0.0, -theta)) * c[p];
    const std::complex<double> wq = std::exp(std::complex<double>(0.0, -theta)) * c[q];
    const double D = wp.imag();
    const double S = wq.real();
    const double scale = coeff_norm(c);
    if (!(S > tol * scale)) return std::nullopt;
    if (std::fabs(D) <= tol * scale) return std::nullopt;
    if (std::fabs(D) > S * (1.0 + 1e-12)) return std::nullopt;
    return StructuredView{theta, S, D, NormalizationGauge{p, q}};
}

} // namespace detail

/// Recover (|alpha|, |beta|, mu, nu) from coefficients.
///
/// The identification first tries the input as given (theta = 0) in the
/// default gauge, which makes composition round trips exact. Vectors arriving
/// in another gauge trigger a retry over anchor choices and, failing that,
/// over the global phase, before being declared not representable.
inline MicrostateResult identify(const CoefficientVector& c, double tol = 1e-9) {
    const std::size_t n = c.size();
    if (n < 2 || (n & (n - 1)) != 0 || n > 8)
        throw invalid_input("identify: coefficient count must be 2^d with d in {1,2,3}");
    const double norm = coeff_norm(c);
    if (norm == 0.0) throw invalid_input("identify: zero coefficient vector");

    RealCaseCheck rc = is_real_case(c, tol);
    if (rc.is_real) {
        // Real wave function: mu determined from the aligned real parts, all
        // non-anchor nu free -- the microstate family.
        NormalizationGauge gauge = default_gauge(n);
        double theta = rc.phase;
        CoefficientVector r = rotate_phase(c, theta);
        double S = r[gauge.mu_anchor].real();
        if (std::fabs(S) <= tol * norm) {
            // anchor entry vanishes; re-anchor mu on the largest real part
            std::size_t best = gauge.mu_anchor;
            double best_mag = std::fabs(S);
            for (std::size_t i = 0; i < n; ++i)
                if (std::fabs(r[i].real()) > best_mag) {
                    best = i;
                    best_mag = std::fabs(r[i].real());
                }
            gauge.mu_anchor = best;
            if (gauge.nu_anchor == best) gauge.nu_anchor = (best + 1) % n;
            S = r[best].real();
        }
        if (S < 0.0) {
            theta += M_PI;
            r = rotate_phase(c, theta);
            S = r[gauge.mu_anchor].real();
        }
        MicrostateResult out;
        out.kind = MicrostateCase::real_family;
        out.gauge = gauge;
        out.modulus_alpha = out.modulus_beta = 0.5 * S;
        out.mu.resize(n);
        for (std::size_t i = 0; i < n; ++i) out.mu[i] = r[i].real() / S;
        out.nu.assign(n, std::nullopt);
        out.nu[gauge.nu_anchor] = 1.0;
        out.family_dimension = n - 1;
        out.global_phase = theta;
        out.condition = std::numeric_limits<double>::infinity();
        return out;
    }

    // Complex case: hunt for a readable (theta, anchors) combination.
    std::optional<detail::StructuredView> view;
    const NormalizationGauge def = default_gauge(n);
    view = detail::try_view(c, 0.0, def.nu_anchor, def.mu_anchor, tol);
    if (!view) {
        for (std::size_t p = 0; p < n && !view; ++p)
            for (std::size_t q = 0; q < n && !view; ++q)
                if (p != q) view = detail::try_view(c, 0.0, p, q, tol);
    }
    if (!view) {
        // scan the phase circle; any interior point of the representable arc works
        for (std::size_t p = 0; p < n && !view; ++p)
            for (std::size_t q = 0; q < n && !view; ++q) {
                if (p == q) continue;
                double best_margin = 0.0;
                std::optional<detail::StructuredView> best;
                for (int step = 0; step < 1440; ++step) {
                    double theta = 2.0 * M_PI * step / 1440.0;
                    auto v = detail::try_view(c, theta, p, q, tol);
                    if (v && v->S - std::fabs(v->D) > best_margin) {
                        best_margin = v->S - std::fabs(v->D);
                        best = v;
                    }
                }
                if (best) view = best;
            }
    }
    if (!view)
        throw degenerate_input(
            "identify: coefficients do not fit the normalized identification structure in any gauge; "
            "renormalize the basis (choose which phi carries the nu anchor)");

    const CoefficientVector r = rotate_phase(c, view->theta);
    MicrostateResult out;
    out.kind = MicrostateCase::complex_unique;
    out.gauge = view->gauge;
    out.global_phase = view->theta;
    out.modulus_alpha = 0.5 * (view->S + view->D);
    out.modulus_beta = 0.5 * (view->S - view->D);
    out.condition = view->S / std::fabs(view->D);
    out.mu.resize(n);
    out.nu.assign(n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i) {
        out.mu[i] = r[i].real() / view->S;
        out.nu[i] = r[i].imag() / view->D;
    }
    out.family_dimension = 0;

    // forward composition must reproduce the input
    std::vector<double> nu_plain(n);
    for (std::size_t i = 0; i < n; ++i) nu_plain[i] = *out.nu[i];
    CoefficientVector back =
        compose_coefficients(ActionParams{nu_plain, out.mu, 0.0}, out.modulus_alpha, out.modulus_beta, out.gauge);
    double dev = 0.0;
    const std::complex<double> w = std::exp(std::complex<double>(0.0, out.global_phase));
    for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(w * back[i] - c[i]));
    if (!(dev <= 1e-10 * std::max(1.0, norm)))
        throw numerical_failure("identify: forward composition deviates by " + std::to_string(dev));
    return out;
}

// ---------------------------------------------------------------------------
// Family enumeration (real case)
// ---------------------------------------------------------------------------

struct FamilyEnumeration {
    std::vector<ActionParams> members;
    std::vector<std::size_t> skipped; ///< sample indices rejected as proportional
};

/// One ActionParams per nu sample. All members compose (with |alpha| = |beta|)
/// to the same coefficient vector up to a global scalar, yet carry different
/// conjugate-momentum fields.
inline FamilyEnumeration enumerate_family(const MicrostateResult& result,
                                          const std::vector<std::vector<double>>& nu_samples) {
    if (result.kind != MicrostateCase::real_family)
        throw invalid_input("enumerate_family: result is not a real-case family");
    const std::size_t n = result.mu.size();
    FamilyEnumeration out;
    for (std::size_t s = 0; s < nu_samples.size(); ++s) {
        std::vector<double> nu = nu_samples[s];
        if (nu.size() != n) throw invalid_input("enumerate_family: nu sample has wrong length");
        nu[result.gauge.nu_anchor] = 1.0;
        try {
            out.members.push_back(make_action_params(std::move(nu), result.mu, 0.0));
        } catch (const invalid_input&) {
            out.skipped.push_back(s);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bohm-ansatz diagnostic
// ---------------------------------------------------------------------------

struct BohmReport {
    bool compatible = false;
    double phase = 0.0;        ///< alignment phase at which the test was decided
    double im_c_anchor = 0.0;  ///< Im c'_p, must be 1 under alpha = 1, beta = 0
    double re_c_last = 0.0;    ///< Re c'_q, must be 1
};

/// Is c compatible with the Bohm ansatz (alpha, beta) = (1, 0)? That forces
/// Im c_p = 1 and Re c_q = 1 after phase alignment, so generic initial
/// conditions fail the test.
inline BohmReport bohm_diagnostic(const CoefficientVector& c, double tol = 1e-9) {
    const std::size_t n = c.size();
    const NormalizationGauge g = default_gauge(n);
    auto judge = [&](double theta) {
        BohmReport r;
        r.phase = theta;
        const std::complex<double> w = std::exp(std::complex<double>(0.0, -theta));
        r.im_c_anchor = (w * c[g.nu_anchor]).imag();
        r.re_c_last = (w * c[g.mu_anchor]).real();
        r.compatible = std::fabs(r.im_c_anchor - 1.0) <= tol && std::fabs(r.re_c_last - 1.0) <= tol;
        return r;
    };

    BohmReport direct = judge(0.0);
    if (direct.compatible) return direct;

    // phases that make Im[e^{-i theta} c_p] exactly 1, if any
    const double mag = std::abs(c[g.nu_anchor]);
    if (mag >= 1.0) {
        const double phi = std::arg(c[g.nu_anchor]);
        const double delta = std::asin(1.0 / mag);
        for (double theta : {phi - delta, phi - M_PI + delta}) {
            BohmReport r = judge(theta);
            if (r.compatible) return r;
        }
    }
    return direct;
}

} // namespace qshje
