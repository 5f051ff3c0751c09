#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qshje/core.hpp"
#include "qshje/expr.hpp"

namespace qshje {

enum class PotentialKind { free, constant_step, harmonic, quartic, tabulated, expression };

/// One-dimensional potential on a closed interval.
///
/// Catalog forms are analytic (V' exact); tabulated data is interpolated with a
/// local cubic and differentiated with 5-point stencils on its own grid.
class Potential1D {
public:
    static Potential1D make_free(Interval dom) {
        return Potential1D(PotentialKind::free, dom);
    }

    /// Uniform offset V0 (the "step" height seen by a particle of energy E).
    static Potential1D make_constant(Interval dom, double v0) {
        Potential1D p(PotentialKind::constant_step, dom);
        p.p0_ = v0;
        return p;
    }

    /// V(x) = (1/2) m omega^2 x^2.
    static Potential1D make_harmonic(Interval dom, double mass, double omega = 1.0) {
        Potential1D p(PotentialKind::harmonic, dom);
        p.p0_ = 0.5 * mass * omega * omega;
        if (!(p.p0_ > 0.0)) throw invalid_input("harmonic potential: need mass, omega > 0");
        return p;
    }

    /// V(x) = lambda x^4.
    static Potential1D make_quartic(Interval dom, double lambda = 1.0) {
        Potential1D p(PotentialKind::quartic, dom);
        p.p0_ = lambda;
        return p;
    }

    static Potential1D make_expression(Interval dom, const std::string& source) {
        Potential1D p(PotentialKind::expression, dom);
        p.expr_src_ = source;
        p.expr_fn_ = expr::compile(source);
        return p;
    }

    static Potential1D make_tabulated(Interval dom, std::vector<double> xs, std::vector<double> vs) {
        Potential1D p(PotentialKind::tabulated, dom);
        if (xs.size() != vs.size() || xs.size() < 4)
            throw invalid_input("tabulated potential: need >= 4 matching (x, V) samples");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1]))
                throw invalid_input("tabulated potential: abscissae must strictly increase");
        if (xs.front() > dom.lo || xs.back() < dom.hi)
            throw invalid_input("tabulated potential: samples do not cover the domain");
        p.tab_x_ = std::move(xs);
        p.tab_v_ = std::move(vs);
        return p;
    }

    /// Two-column CSV (x, V); '#' lines are comments.
    static Potential1D from_csv(Interval dom, const std::string& path) {
        std::ifstream in(path);
        if (!in) throw invalid_input("cannot open potential CSV: " + path);
        std::vector<double> xs, vs;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            double x, v;
            if (ls >> x >> v) {
                xs.push_back(x);
                vs.push_back(v);
            }
        }
        return make_tabulated(dom, std::move(xs), std::move(vs));
    }

    PotentialKind kind() const { return kind_; }
    const Interval& domain() const { return dom_; }

    double operator()(double x) const {
        switch (kind_) {
            case PotentialKind::free:          return 0.0;
            case PotentialKind::constant_step: return p0_;
            case PotentialKind::harmonic:      return p0_ * x * x;
            case PotentialKind::quartic:       return p0_ * x * x * x * x;
            case PotentialKind::expression:    return expr_fn_(x);
            case PotentialKind::tabulated:     return tab_eval(x);
        }
        return 0.0;
    }

    /// dV/dx; analytic where the form is known, 5-point differences otherwise.
    double derivative(double x) const {
        switch (kind_) {
            case PotentialKind::free:
            case PotentialKind::constant_step: return 0.0;
            case PotentialKind::harmonic:      return 2.0 * p0_ * x;
            case PotentialKind::quartic:       return 4.0 * p0_ * x * x * x;
            case PotentialKind::expression:    return fd_derivative(x);
            case PotentialKind::tabulated:     return fd_derivative(x);
        }
        return 0.0;
    }

    /// Max |V| over a sampling of the domain; used as a residual normalization scale.
    double max_abs(std::size_t samples = 512) const {
        double m = 0.0;
        for (std::size_t i = 0; i < samples; ++i) {
            double x = dom_.lo + dom_.length() * static_cast<double>(i) / static_cast<double>(samples - 1);
            m = std::max(m, std::fabs((*this)(x)));
        }
        return m;
    }

    /// Every value sampled on a grid of n nodes must be finite.
    void validate_finite(std::size_t n) const {
        for (std::size_t i = 0; i < n; ++i) {
            double x = dom_.lo + dom_.length() * static_cast<double>(i) / static_cast<double>(n - 1);
            if (!std::isfinite((*this)(x)))
                throw invalid_input("potential is not finite at x = " + std::to_string(x));
        }
    }

private:
    Potential1D(PotentialKind k, Interval dom) : kind_(k), dom_(dom) { dom_.validate(); }

    double tab_eval(double x) const {
        // 4-point Lagrange interpolation on the bracketing samples.
        const auto& xs = tab_x_;
        const auto& vs = tab_v_;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - xs.begin()) - 1);
        std::size_t i0 = (j == 0) ? 0 : j - 1;
        i0 = std::min(i0, xs.size() - 4);
        double r = 0.0;
        for (std::size_t a = i0; a < i0 + 4; ++a) {
            double term = vs[a];
            for (std::size_t b = i0; b < i0 + 4; ++b)
                if (b != a) term *= (x - xs[b]) / (xs[a] - xs[b]);
            r += term;
        }
        return r;
    }

    double fd_derivative(double x) const {
        const double h = std::max(1e-5 * dom_.length(), 1e-8);
        const Potential1D& V = *this;
        if (x - 2 * h >= dom_.lo && x + 2 * h <= dom_.hi)
            return (V(x - 2 * h) - 8.0 * V(x - h) + 8.0 * V(x + h) - V(x + 2 * h)) / (12.0 * h);
        if (x + 4 * h <= dom_.hi) // one-sided forward
            return (-25.0 * V(x) + 48.0 * V(x + h) - 36.0 * V(x + 2 * h) + 16.0 * V(x + 3 * h) - 3.0 * V(x + 4 * h)) / (12.0 * h);
        // one-sided backward
        return (25.0 * V(x) - 48.0 * V(x - h) + 36.0 * V(x - 2 * h) - 16.0 * V(x - 3 * h) + 3.0 * V(x - 4 * h)) / (12.0 * h);
    }

    PotentialKind kind_;
    Interval dom_;
    double p0_ = 0.0;
    std::string expr_src_;
    expr::Fn expr_fn_;
    std::vector<double> tab_x_, tab_v_;
};

} // namespace qshje
