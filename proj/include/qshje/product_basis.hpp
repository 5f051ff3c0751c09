#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qshje/basis1d.hpp"
#include "qshje/core.hpp"
#include "qshje/potential.hpp"

namespace qshje {

/// Evaluation point; only the first `dimension` entries are meaningful.
using Point = std::array<double, 3>;

/// One separable axis: potential, axis energy and the basis pair solving it.
struct AxisData {
    Potential1D potential;
    double energy;
    BasisPair pair;
};

/// Separable problem description: per-axis data plus the total energy
/// E = sum of axis energies.
struct SeparableSpec {
    std::vector<AxisData> axes;
    PhysicalConstants constants;
    double total_energy = 0.0;

    std::size_t dimension() const { return axes.size(); }
};

/// Coefficients (nu, mu) of psi1 = sum nu_i phi_i, psi2 = sum mu_i phi_i and
/// the additive constant l of the reduced action. Construction rejects
/// proportional rows, which would make psi1 and psi2 dependent.
struct ActionParams {
    std::vector<double> nu;
    std::vector<double> mu;
    double l = 0.0;
};

/// Proportionality measure of the 2 x 2^d coefficient matrix: smallest over
/// largest singular value.
inline double params_independence_ratio(const std::vector<double>& nu, const std::vector<double>& mu) {
    Eigen::MatrixXd m(2, static_cast<Eigen::Index>(nu.size()));
    for (std::size_t i = 0; i < nu.size(); ++i) {
        m(0, static_cast<Eigen::Index>(i)) = nu[i];
        m(1, static_cast<Eigen::Index>(i)) = mu[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(1);
    return smax > 0.0 ? smin / smax : 0.0;
}

inline ActionParams make_action_params(std::vector<double> nu, std::vector<double> mu, double l = 0.0,
                                       double independence_threshold = 1e-10) {
    if (nu.size() != mu.size() || nu.empty())
        throw invalid_input("ActionParams: nu and mu must have equal nonzero length");
    if ((nu.size() & (nu.size() - 1)) != 0 || nu.size() > 8)
        throw invalid_input("ActionParams: length must be 2^d with d in {1,2,3}");
    for (double v : nu)
        if (!std::isfinite(v)) throw invalid_input("ActionParams: non-finite nu entry");
    for (double v : mu)
        if (!std::isfinite(v)) throw invalid_input("ActionParams: non-finite mu entry");
    if (params_independence_ratio(nu, mu) <= independence_threshold)
        throw invalid_input("ActionParams: (nu, mu) are proportional; psi1 and psi2 would be dependent");
    return ActionParams{std::move(nu), std::move(mu), l};
}

/// All 2^d products phi_i at one point: values, gradients, per-axis pure
/// second partials (factor rule with the axis ODE identity), and the axis
/// f factors so that Laplacians can be assembled downstream.
struct BasisEval {
    std::size_t dimension = 0;
    std::vector<double> phi;
    std::vector<std::array<double, 3>> dphi;
    std::vector<std::array<double, 3>> ddphi;
    std::array<double, 3> axis_f{};
};

/// The 2 (1D), 4 (2D) or 8 (3D) product solutions of the separable problem.
///
/// Index order fixes the factor selection: with axes (x, y, z), product i
/// takes the second factor on axis a iff bit (d-1-a) of i is set. In 2D this
/// is phi1 = X1Y1, phi2 = X1Y2, phi3 = X2Y1, phi4 = X2Y2; in 3D the Z index
/// runs fastest, then Y, then X.
class ProductBasis {
public:
    explicit ProductBasis(SeparableSpec spec) : spec_(std::move(spec)) {}

    std::size_t dimension() const { return spec_.dimension(); }
    std::size_t count() const { return std::size_t{1} << dimension(); }
    const SeparableSpec& spec() const { return spec_; }
    const PhysicalConstants& constants() const { return spec_.constants; }
    double total_energy() const { return spec_.total_energy; }

    Interval axis_domain(std::size_t a) const { return spec_.axes[a].pair.domain(); }

    bool contains(const Point& p) const {
        for (std::size_t a = 0; a < dimension(); ++a)
            if (!axis_domain(a).contains(p[a])) return false;
        return true;
    }

    /// Factor index (0 or 1) chosen by product i on axis a.
    std::size_t factor_select(std::size_t i, std::size_t a) const {
        return (i >> (dimension() - 1 - a)) & 1u;
    }

    BasisEval eval(const Point& p) const {
        if (!contains(p)) throw invalid_input("ProductBasis::eval: point outside domain box");
        const std::size_t d = dimension();
        const std::size_t n = count();

        std::array<PairEval, 3> ax{};
        for (std::size_t a = 0; a < d; ++a)
            ax[a] = eval_with_second_derivative(spec_.axes[a].pair, spec_.axes[a].potential, spec_.constants, p[a]);

        BasisEval e;
        e.dimension = d;
        e.phi.assign(n, 0.0);
        e.dphi.assign(n, {0.0, 0.0, 0.0});
        e.ddphi.assign(n, {0.0, 0.0, 0.0});
        for (std::size_t a = 0; a < d; ++a)
            e.axis_f[a] = detail::schrodinger_f(spec_.axes[a].potential, spec_.axes[a].energy, spec_.constants, p[a]);

        for (std::size_t i = 0; i < n; ++i) {
            double val = 1.0;
            std::array<double, 3> grad{1.0, 1.0, 1.0};
            std::array<double, 3> curv{1.0, 1.0, 1.0};
            for (std::size_t a = 0; a < d; ++a) {
                const PairEval& pe = ax[a];
                const bool second = factor_select(i, a) == 1;
                const double v = second ? pe.psi2 : pe.psi1;
                const double dv = second ? pe.dpsi2 : pe.dpsi1;
                const double ddv = second ? pe.ddpsi2 : pe.ddpsi1;
                val *= v;
                for (std::size_t b = 0; b < d; ++b) {
                    grad[b] *= (b == a) ? dv : v;
                    curv[b] *= (b == a) ? ddv : v;
                }
            }
            e.phi[i] = val;
            for (std::size_t b = 0; b < d; ++b) {
                e.dphi[i][b] = grad[b];
                e.ddphi[i][b] = curv[b];
            }
        }
        return e;
    }

private:
    SeparableSpec spec_;
};

/// Assemble the product basis after validating the separable-spec invariants.
inline ProductBasis build_products(SeparableSpec spec) {
    spec.constants.validate();
    const std::size_t d = spec.dimension();
    if (d < 1 || d > 3) throw invalid_input("build_products: dimension must be 1, 2 or 3");
    double esum = 0.0;
    for (const auto& ax : spec.axes) {
        if (ax.pair.size() < 2) throw invalid_input("build_products: empty axis basis pair");
        esum += ax.energy;
    }
    const double floor = 1e-30;
    if (std::fabs(esum - spec.total_energy) >
        1e-12 * std::max({std::fabs(esum), std::fabs(spec.total_energy), floor}))
        throw invalid_input("build_products: axis energies do not sum to the total energy");
    return ProductBasis(std::move(spec));
}

// ---------------------------------------------------------------------------
// Product relations between the phi_i (2D: phi1 phi4 = phi2 phi3; 3D: the six
// pair relations plus the four-fold chain phi1 phi8 = phi2 phi7 = phi3 phi6 =
// phi4 phi5).
// ---------------------------------------------------------------------------

struct ProductRelation {
    std::array<std::size_t, 2> lhs;
    std::array<std::size_t, 2> rhs;
};

inline std::vector<ProductRelation> product_relations(std::size_t dimension) {
    switch (dimension) {
        case 2:
            return {{{0, 3}, {1, 2}}};
        case 3:
            return {
                {{0, 3}, {1, 2}}, {{0, 5}, {1, 4}}, {{0, 6}, {2, 4}},
                {{1, 7}, {3, 5}}, {{2, 7}, {3, 6}}, {{4, 7}, {5, 6}},
                {{0, 7}, {1, 6}}, {{1, 6}, {2, 5}}, {{2, 5}, {3, 4}},
            };
        default:
            return {};
    }
}

struct RelationReport {
    double max_normalized = 0.0;
    Point worst_point{};
    std::size_t relations_checked = 0;
};

/// Evaluate every product relation at each sample point; deviations are
/// normalized by the largest product magnitude at that point.
inline RelationReport check_product_relations(const ProductBasis& basis, const std::vector<Point>& sample_points) {
    if (basis.dimension() < 2) throw invalid_input("check_product_relations: dimension must be >= 2");
    const auto rels = product_relations(basis.dimension());
    RelationReport rep;
    rep.relations_checked = rels.size();
    for (const Point& p : sample_points) {
        BasisEval e = basis.eval(p);
        double scale = 0.0;
        for (std::size_t i = 0; i < e.phi.size(); ++i)
            for (std::size_t l = i; l < e.phi.size(); ++l)
                scale = std::max(scale, std::fabs(e.phi[i] * e.phi[l]));
        scale = std::max(scale, 1e-300);
        for (const auto& r : rels) {
            double lhs = e.phi[r.lhs[0]] * e.phi[r.lhs[1]];
            double rhs = e.phi[r.rhs[0]] * e.phi[r.rhs[1]];
            double dev = std::fabs(lhs - rhs) / scale;
            if (dev > rep.max_normalized) {
                rep.max_normalized = dev;
                rep.worst_point = p;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Linear combinations psi1 = sum nu_i phi_i, psi2 = sum mu_i phi_i
// ---------------------------------------------------------------------------

struct CombineEval {
    std::size_t dimension = 0;
    double psi1 = 0.0, psi2 = 0.0;
    std::array<double, 3> grad1{}, grad2{};
    std::array<double, 3> dd1{}, dd2{}; ///< pure second partials per axis
    std::array<double, 3> axis_f{};

    double laplacian1() const {
        double s = 0.0;
        for (std::size_t a = 0; a < dimension; ++a) s += dd1[a];
        return s;
    }
    double laplacian2() const {
        double s = 0.0;
        for (std::size_t a = 0; a < dimension; ++a) s += dd2[a];
        return s;
    }
};

inline CombineEval combine(const BasisEval& e, const ActionParams& params) {
    if (params.nu.size() != e.phi.size())
        throw invalid_input("combine: params length does not match basis count");
    CombineEval r;
    r.dimension = e.dimension;
    r.axis_f = e.axis_f;
    for (std::size_t i = 0; i < e.phi.size(); ++i) {
        r.psi1 += params.nu[i] * e.phi[i];
        r.psi2 += params.mu[i] * e.phi[i];
        for (std::size_t a = 0; a < e.dimension; ++a) {
            r.grad1[a] += params.nu[i] * e.dphi[i][a];
            r.grad2[a] += params.mu[i] * e.dphi[i][a];
            r.dd1[a] += params.nu[i] * e.ddphi[i][a];
            r.dd2[a] += params.mu[i] * e.ddphi[i][a];
        }
    }
    return r;
}

inline CombineEval combine(const ProductBasis& basis, const ActionParams& params, const Point& p) {
    return combine(basis.eval(p), params);
}

} // namespace qshje
