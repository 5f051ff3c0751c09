#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qshje/core.hpp"
#include "qshje/product_basis.hpp"
#include "qshje/reduced_action.hpp"

namespace qshje {

/// Invertible linear transformation theta_i = sum_j alpha_ij phi_j of the
/// 2^d product solutions.
struct TransformMatrix {
    std::size_t dimension = 1;
    Eigen::MatrixXd entries; // 2^d x 2^d

    std::size_t count() const { return std::size_t{1} << dimension; }
};

inline TransformMatrix make_transform(std::size_t dimension, Eigen::MatrixXd entries) {
    const auto n = static_cast<Eigen::Index>(std::size_t{1} << dimension);
    if (entries.rows() != n || entries.cols() != n)
        throw invalid_input("TransformMatrix: entries must be 2^d x 2^d");
    const double scale = entries.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw invalid_input("TransformMatrix: zero matrix");
    const double det = entries.determinant();
    if (!(std::fabs(det) > 1e-12 * std::pow(scale, static_cast<double>(n))))
        throw invalid_input("TransformMatrix: determinant too small; transform must be invertible");
    return TransformMatrix{dimension, std::move(entries)};
}

inline TransformMatrix identity_transform(std::size_t dimension) {
    const auto n = static_cast<Eigen::Index>(std::size_t{1} << dimension);
    return TransformMatrix{dimension, Eigen::MatrixXd::Identity(n, n)};
}

/// beta with sum_j beta_ij alpha_jl = delta_il, verified to 1e-12.
inline TransformMatrix invert_transform(const TransformMatrix& t) {
    Eigen::MatrixXd beta = t.entries.partialPivLu().inverse();
    const double defect = (beta * t.entries - Eigen::MatrixXd::Identity(t.entries.rows(), t.entries.cols()))
                              .cwiseAbs()
                              .maxCoeff();
    if (!(defect < 1e-12 * std::max(1.0, beta.cwiseAbs().maxCoeff() * t.entries.cwiseAbs().maxCoeff())))
        throw numerical_failure("invert_transform: inversion defect " + std::to_string(defect));
    return TransformMatrix{t.dimension, std::move(beta)};
}

/// Which coefficient indices are pinned to 1: nu[nu_anchor] = 1 and
/// mu[mu_anchor] = 1. The paper's convention is (first, last).
struct NormalizationGauge {
    std::size_t nu_anchor;
    std::size_t mu_anchor;
};

inline NormalizationGauge default_gauge(std::size_t n_coeffs) { return {0, n_coeffs - 1}; }

// ---------------------------------------------------------------------------
// The invariance linear system
// ---------------------------------------------------------------------------

/// Homogeneous linear system in the unknowns u = (tilde_nu, tilde_mu) whose
/// solutions make S0 and the transformed reduced action agree up to an
/// additive constant, at a fixed branch parameter k.
///
/// In 1D the rows are the three coefficient equations of the theta_i theta_j
/// expansion (beta form). In 2D/3D the expansion is taken in phi_i phi_l:
/// with A_l = sum_j (k tilde_nu_j - tilde_mu_j) alpha_jl and
/// B_l = sum_j (k tilde_mu_j + tilde_nu_j) alpha_jl, one row per independent
/// product term: the 2^d diagonal terms, the plain symmetric pairs, and one
/// combined row per product-relation class (phi_i phi_l coincide there, so
/// their coefficients add). Row counts: 3 (1D), 9 (2D), 27 (3D); generic
/// ranks 3, 7, 15.
struct InvarianceSystem {
    Eigen::MatrixXd rows;  // over (tilde_nu_1..n, tilde_mu_1..n)
    std::size_t unknowns = 0;
};

namespace detail {

// Product-relation classes of (i, l) index pairs, 0-based, i < l.
inline std::vector<std::vector<std::array<std::size_t, 2>>> relation_classes(std::size_t d) {
    if (d == 2) return {{{0, 3}, {1, 2}}};
    if (d == 3)
        return {
            {{0, 3}, {1, 2}}, {{0, 5}, {1, 4}}, {{0, 6}, {2, 4}},
            {{1, 7}, {3, 5}}, {{2, 7}, {3, 6}}, {{4, 7}, {5, 6}},
            {{0, 7}, {1, 6}, {2, 5}, {3, 4}},
        };
    return {};
}

} // namespace detail

inline InvarianceSystem build_invariance_system(const ActionParams& params, const TransformMatrix& transform,
                                                double k) {
    const std::size_t d = transform.dimension;
    const std::size_t n = transform.count();
    if (params.nu.size() != n) throw invalid_input("build_invariance_system: params/transform size mismatch");

    InvarianceSystem sys;
    sys.unknowns = 2 * n;

    if (d == 1) {
        const Eigen::MatrixXd beta = invert_transform(transform).entries;
        // P_l = sum_i (k mu_i - nu_i) beta_il,  Q_l = sum_i (k nu_i + mu_i) beta_il
        std::array<double, 2> P{}, Q{};
        for (std::size_t l = 0; l < 2; ++l)
            for (std::size_t i = 0; i < 2; ++i) {
                P[l] += (k * params.mu[i] - params.nu[i]) * beta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
                Q[l] += (k * params.nu[i] + params.mu[i]) * beta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
            }
        sys.rows = Eigen::MatrixXd::Zero(3, 4); // (nu~1, nu~2, mu~1, mu~2)
        sys.rows(0, 0) = Q[0]; sys.rows(0, 2) = P[0];                                       // theta_1^2
        sys.rows(1, 1) = Q[1]; sys.rows(1, 3) = P[1];                                       // theta_2^2
        sys.rows(2, 0) = Q[1]; sys.rows(2, 1) = Q[0]; sys.rows(2, 2) = P[1]; sys.rows(2, 3) = P[0]; // theta_1 theta_2
        return sys;
    }

    const Eigen::MatrixXd& alpha = transform.entries;

    // Coefficients of A_l and B_l over u = (tilde_nu, tilde_mu).
    auto a_row = [&](std::size_t l, Eigen::RowVectorXd& out) {
        for (std::size_t j = 0; j < n; ++j) {
            out(static_cast<Eigen::Index>(j)) = k * alpha(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
            out(static_cast<Eigen::Index>(n + j)) = -alpha(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
        }
    };
    auto b_row = [&](std::size_t l, Eigen::RowVectorXd& out) {
        for (std::size_t j = 0; j < n; ++j) {
            out(static_cast<Eigen::Index>(j)) = alpha(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
            out(static_cast<Eigen::Index>(n + j)) = k * alpha(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
        }
    };

    Eigen::RowVectorXd Ai(2 * n), Bi(2 * n), Al(2 * n), Bl(2 * n);
    // contribution of the ordered pair (i, l): A_l nu_i + B_l mu_i
    auto term = [&](std::size_t i, std::size_t l) -> Eigen::RowVectorXd {
        a_row(l, Al);
        b_row(l, Bl);
        return params.nu[i] * Al + params.mu[i] * Bl;
    };

    const auto classes = detail::relation_classes(d);
    auto in_class = [&](std::size_t i, std::size_t l) {
        for (const auto& cls : classes)
            for (const auto& pr : cls)
                if (pr[0] == i && pr[1] == l) return true;
        return false;
    };

    std::vector<Eigen::RowVectorXd> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(term(i, i)); // diagonal terms
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = i + 1; l < n; ++l)
            if (!in_class(i, l)) rows.push_back(term(i, l) + term(l, i));
    for (const auto& cls : classes) {
        Eigen::RowVectorXd combined = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(2 * n));
        for (const auto& pr : cls) combined += term(pr[0], pr[1]) + term(pr[1], pr[0]);
        rows.push_back(combined);
    }

    sys.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(2 * n));
    for (std::size_t r = 0; r < rows.size(); ++r) sys.rows.row(static_cast<Eigen::Index>(r)) = rows[r];
    return sys;
}

/// Numerical rank via singular values, threshold 1e-10 of the largest.
inline std::size_t numerical_rank(const Eigen::MatrixXd& m, double ratio = 1e-10) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > ratio * sv(0)) ++r;
    return r;
}

// ---------------------------------------------------------------------------
// Solving for the tilde parameters
// ---------------------------------------------------------------------------

/// Solved tilde coefficients, normalized to tilde_nu[gauge.nu_anchor] = 1 and
/// tilde_mu[gauge.mu_anchor] = 1, with the branch parameter k and solve
/// diagnostics.
struct TildeSolve {
    std::vector<double> tilde_nu;
    std::vector<double> tilde_mu;
    double k = 0.0;
    std::size_t rank = 0;
    double residual = 0.0;
    NormalizationGauge gauge{0, 0};
};

namespace detail {

inline void require_normalized(const ActionParams& params, const NormalizationGauge& g) {
    if (std::fabs(params.nu[g.nu_anchor] - 1.0) > 1e-12 || std::fabs(params.mu[g.mu_anchor] - 1.0) > 1e-12)
        throw invalid_input("solve_tilde: params must be normalized to nu[anchor] = mu[anchor] = 1");
}

} // namespace detail

/// Choose k so that the gauge normalization of the tilde parameters is
/// achievable, then solve the invariance system for the remaining ones.
///
/// With a = beta^T nu and b = beta^T mu, imposing tilde_mu[q] = 1 alongside
/// tilde_nu[p] = 1 forces k = (a_p - b_q) / (a_q + b_p), the generalization of
/// the paper's 1D choice. A vanishing denominator means no finite branch
/// parameter reaches this gauge; such transforms are reported, not perturbed.
inline TildeSolve solve_tilde(const ActionParams& params, const TransformMatrix& transform,
                              NormalizationGauge gauge = {0, static_cast<std::size_t>(-1)}) {
    const std::size_t n = transform.count();
    if (params.nu.size() != n) throw invalid_input("solve_tilde: params/transform size mismatch");
    if (gauge.mu_anchor == static_cast<std::size_t>(-1)) gauge = default_gauge(n);
    detail::require_normalized(params, gauge);

    const Eigen::MatrixXd beta = invert_transform(transform).entries;
    Eigen::VectorXd nu(static_cast<Eigen::Index>(n)), mu(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        nu(static_cast<Eigen::Index>(i)) = params.nu[i];
        mu(static_cast<Eigen::Index>(i)) = params.mu[i];
    }
    const Eigen::VectorXd a = beta.transpose() * nu;
    const Eigen::VectorXd b = beta.transpose() * mu;

    const auto p = static_cast<Eigen::Index>(gauge.nu_anchor);
    const auto q = static_cast<Eigen::Index>(gauge.mu_anchor);
    const double denom = a(q) + b(p);
    const double scale = a.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff();
    if (std::fabs(denom) <= 1e-12 * scale)
        throw degenerate_input("solve_tilde: degenerate transform, k denominator (beta^T nu)[mu_anchor] + "
                               "(beta^T mu)[nu_anchor] vanishes");
    const double k = (a(p) - b(q)) / denom;

    InvarianceSystem sys = build_invariance_system(params, transform, k);

    // Pin the two anchor unknowns to 1 and least-squares solve for the rest.
    const auto un = static_cast<Eigen::Index>(sys.unknowns);
    const Eigen::Index col_nu = p, col_mu = static_cast<Eigen::Index>(n) + q;
    Eigen::VectorXd rhs = -(sys.rows.col(col_nu) + sys.rows.col(col_mu));
    Eigen::MatrixXd reduced(sys.rows.rows(), un - 2);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < un; ++j) {
        if (j == col_nu || j == col_mu) continue;
        reduced.col(c++) = sys.rows.col(j);
    }
    Eigen::VectorXd x = reduced.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);

    Eigen::VectorXd u(un);
    c = 0;
    for (Eigen::Index j = 0; j < un; ++j) {
        if (j == col_nu || j == col_mu) {
            u(j) = 1.0;
            continue;
        }
        u(j) = x(c++);
    }

    const double coeff_scale = sys.rows.cwiseAbs().maxCoeff() * std::max(1.0, u.cwiseAbs().maxCoeff());
    const double residual = (sys.rows * u).cwiseAbs().maxCoeff();
    if (!(residual < 1e-10 * std::max(coeff_scale, 1e-300)))
        throw numerical_failure("solve_tilde: invariance system inconsistent, residual " + std::to_string(residual));

    TildeSolve out;
    out.k = k;
    out.rank = numerical_rank(sys.rows);
    out.residual = residual / std::max(coeff_scale, 1e-300);
    out.gauge = gauge;
    out.tilde_nu.resize(n);
    out.tilde_mu.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.tilde_nu[i] = u(static_cast<Eigen::Index>(i));
        out.tilde_mu[i] = u(static_cast<Eigen::Index>(n + i));
    }
    return out;
}

/// 1D cross-check value: the paper's explicit branch-parameter choice,
/// k = sum_i (nu_i beta_i1 - mu_i beta_i2) / sum_i (nu_i beta_i2 + mu_i beta_i1).
inline double k_choice_1d(const ActionParams& params, const TransformMatrix& transform) {
    if (transform.dimension != 1) throw invalid_input("k_choice_1d: 1D transforms only");
    const Eigen::MatrixXd beta = invert_transform(transform).entries;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        num += params.nu[i] * beta(static_cast<Eigen::Index>(i), 0) - params.mu[i] * beta(static_cast<Eigen::Index>(i), 1);
        den += params.nu[i] * beta(static_cast<Eigen::Index>(i), 1) + params.mu[i] * beta(static_cast<Eigen::Index>(i), 0);
    }
    if (den == 0.0) throw degenerate_input("k_choice_1d: denominator vanishes");
    return num / den;
}

/// Coefficients over the original phi basis that reproduce the tilde reduced
/// action: combining theta with tilde coefficients equals combining phi with
/// alpha^T tilde.
inline ActionParams tilde_effective_params(const TransformMatrix& transform, const TildeSolve& tilde,
                                           double l_tilde = 0.0) {
    const std::size_t n = transform.count();
    std::vector<double> nu(n, 0.0), mu(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            nu[j] += transform.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * tilde.tilde_nu[i];
            mu[j] += transform.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * tilde.tilde_mu[i];
        }
    return make_action_params(std::move(nu), std::move(mu), l_tilde);
}

// ---------------------------------------------------------------------------
// Conjugate-momentum invariance verification
// ---------------------------------------------------------------------------

struct InvarianceReport {
    double worst_momentum_deviation = 0.0;
    Point worst_point{};
    double s0_offset_spread = 0.0; ///< max-min of S0 - S0~ over points, mod hbar*pi
    double l0_estimate = 0.0;      ///< (S0 - S0~)/hbar at the first point, principal
    std::size_t points_checked = 0;
};

/// Compare grad S0 built from (params, phi) against grad S0~ built from
/// (tilde, theta) at each point, and check that S0 - S0~ is point-independent
/// modulo hbar*pi branch jumps.
inline InvarianceReport verify_invariance(const QshjeSolution& sol, const TransformMatrix& transform,
                                          const TildeSolve& tilde, const std::vector<Point>& points) {
    QshjeSolution tilde_sol = make_qshje_solution(sol.basis, tilde_effective_params(transform, tilde));
    const double hbar = sol.constants().hbar;

    InvarianceReport rep;
    rep.points_checked = points.size();
    double off_min = 0.0, off_max = 0.0;
    bool first = true;
    double off0 = 0.0;
    for (const Point& p : points) {
        auto g = grad_s0(sol, p);
        auto gt = grad_s0(tilde_sol, p);
        double gmax = 1e-300;
        for (std::size_t a = 0; a < sol.dimension(); ++a) gmax = std::max(gmax, std::fabs(g[a]));
        for (std::size_t a = 0; a < sol.dimension(); ++a) {
            double dev = std::fabs(g[a] - gt[a]) / gmax;
            if (dev > rep.worst_momentum_deviation) {
                rep.worst_momentum_deviation = dev;
                rep.worst_point = p;
            }
        }

        double off = eval_s0(sol, p) - eval_s0(tilde_sol, p);
        if (first) {
            off0 = off;
            rep.l0_estimate = off / hbar;
            off_min = off_max = 0.0;
            first = false;
        } else {
            double rel = off - off0;
            rel -= hbar * M_PI * std::round(rel / (hbar * M_PI));
            off_min = std::min(off_min, rel);
            off_max = std::max(off_max, rel);
        }
    }
    rep.s0_offset_spread = off_max - off_min;
    return rep;
}

// ---------------------------------------------------------------------------
// Parameter counting
// ---------------------------------------------------------------------------

struct CountEvidence {
    std::size_t dimension = 0;
    std::size_t pertinent = 0;
    std::size_t unknowns = 0;
    std::size_t system_rank = 0;
    std::size_t instances = 0;
};

/// Well-conditioned random transform for rank evidence and test sweeps.
inline TransformMatrix random_transform(std::size_t dimension, Rng& rng, double cond_limit = 1e4) {
    const auto n = static_cast<Eigen::Index>(std::size_t{1} << dimension);
    for (int attempt = 0; attempt < 256; ++attempt) {
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rng.normal();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) > 0.0 && sv(0) / sv(sv.size() - 1) < cond_limit)
            return make_transform(dimension, std::move(m));
    }
    throw numerical_failure("random_transform: could not draw a well-conditioned matrix");
}

/// Normalized random action parameters (anchors pinned to 1).
inline ActionParams random_normalized_params(std::size_t dimension, Rng& rng,
                                             NormalizationGauge gauge = {0, static_cast<std::size_t>(-1)}) {
    const std::size_t n = std::size_t{1} << dimension;
    if (gauge.mu_anchor == static_cast<std::size_t>(-1)) gauge = default_gauge(n);
    for (int attempt = 0; attempt < 256; ++attempt) {
        std::vector<double> nu(n), mu(n);
        for (std::size_t i = 0; i < n; ++i) {
            nu[i] = rng.normal();
            mu[i] = rng.normal();
        }
        nu[gauge.nu_anchor] = 1.0;
        mu[gauge.mu_anchor] = 1.0;
        if (params_independence_ratio(nu, mu) > 1e-6)
            return make_action_params(std::move(nu), std::move(mu), 0.0);
    }
    throw numerical_failure("random_normalized_params: could not draw independent rows");
}

/// The paper's integration-constant counts, backed by the numerical rank of
/// the invariance system over random instances: rank 3/7/15 against 2*2^d
/// unknowns, two of which are fixed by the gauge (nu anchor and the k choice),
/// leaving 2, 6, 14 pertinent parameters.
inline CountEvidence pertinent_parameter_count(std::size_t dimension, Rng& rng, std::size_t instances = 20) {
    if (dimension < 1 || dimension > 3) throw invalid_input("pertinent_parameter_count: dimension must be 1..3");
    const std::size_t n = std::size_t{1} << dimension;
    const std::size_t expected_rank = dimension == 1 ? 3 : (dimension == 2 ? 7 : 15);

    CountEvidence ev;
    ev.dimension = dimension;
    ev.unknowns = 2 * n;
    ev.pertinent = 2 * n - 2;
    ev.instances = instances;
    ev.system_rank = expected_rank;
    for (std::size_t i = 0; i < instances; ++i) {
        ActionParams params = random_normalized_params(dimension, rng);
        TransformMatrix t = random_transform(dimension, rng);
        TildeSolve ts = solve_tilde(params, t);
        if (ts.rank != expected_rank)
            throw numerical_failure("pertinent_parameter_count: instance " + std::to_string(i) + " has rank " +
                                    std::to_string(ts.rank) + ", expected " + std::to_string(expected_rank));
    }
    return ev;
}

} // namespace qshje
