#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qshje {

/// ħ and particle mass, both strictly positive.
struct PhysicalConstants {
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const {
        if (!(hbar > 0.0) || !std::isfinite(hbar))
            throw std::invalid_argument("PhysicalConstants: hbar must be finite and > 0");
        if (!(mass > 0.0) || !std::isfinite(mass))
            throw std::invalid_argument("PhysicalConstants: mass must be finite and > 0");
    }
};

/// Closed non-degenerate interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }

    void validate() const {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw std::invalid_argument("Interval: need finite lo < hi");
    }
};

// Error taxonomy. invalid_input covers contract violations detectable up
// front; the others are runtime reports a caller may want to branch on.
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class numerical_failure : public std::runtime_error {
public:
    numerical_failure(const std::string& msg, double worst_abscissa = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(msg), worst_abscissa(worst_abscissa) {}
    double worst_abscissa;
};

class degenerate_input : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Both psi1 and psi2 vanish: the phase (and everything built on it) is undefined there.
class undefined_phase : public std::runtime_error {
public:
    undefined_phase(const std::string& msg, std::vector<double> point)
        : std::runtime_error(msg), point(std::move(point)) {}
    std::vector<double> point;
};

/// Seedable RNG used by every sampling routine so runs replay exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(eng_);
    }
    double normal(double mean = 0.0, double sigma = 1.0) {
        return std::normal_distribution<double>(mean, sigma)(eng_);
    }
    std::uint64_t raw() { return eng_(); }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

inline double sqr(double x) { return x * x; }

/// Relative deviation |a-b| / max(|a|,|b|,floor).
inline double rel_diff(double a, double b, double floor = 1e-300) {
    const double s = std::max({std::fabs(a), std::fabs(b), floor});
    return std::fabs(a - b) / s;
}

} // namespace qshje
