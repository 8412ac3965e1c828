#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace opasym {

/// Real polynomial potential V(x) = sum_k g_k x^k, coefficients stored
/// lowest degree first. Only even-degree, positive-leading polynomials are
/// representable so that e^{-N V} is integrable on the real line.
class Potential {
public:
    explicit Potential(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
        while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
        if (coeffs_.size() < 3) throw config_error("V", "degree must be at least 2 (non-integrable weight)");
        for (double c : coeffs_)
            if (!std::isfinite(c)) throw config_error("V", "coefficients must be finite");
        if (degree() % 2 != 0) throw config_error("V", "odd degree gives a non-integrable weight");
        if (coeffs_.back() <= 0.0) throw config_error("V", "leading coefficient must be positive (non-integrable weight)");
    }

    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }

    template <class X>
    X operator()(const X& x) const { return value(x); }

    /// Horner evaluation; X may be double, std::complex<double> or a
    /// multiprecision real.
    template <class X>
    X value(const X& x) const {
        X acc = X(coeffs_.back());
        for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * x + X(coeffs_[k]);
        return acc;
    }

    template <class X>
    X derivative(const X& x) const {
        X acc = X(0);
        for (std::size_t k = coeffs_.size() - 1; k >= 1; --k)
            acc = acc * x + X(static_cast<double>(k) * coeffs_[k]);
        return acc;
    }

    template <class X>
    X second_derivative(const X& x) const {
        X acc = X(0);
        for (std::size_t k = coeffs_.size() - 1; k >= 2; --k)
            acc = acc * x + X(static_cast<double>(k * (k - 1)) * coeffs_[k]);
        return acc;
    }

    /// Coefficients of V' (lowest degree first).
    std::vector<double> derivative_coeffs() const {
        std::vector<double> d(coeffs_.size() - 1);
        for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
        return d;
    }

    bool is_even() const noexcept {
        for (std::size_t k = 1; k < coeffs_.size(); k += 2)
            if (coeffs_[k] != 0.0) return false;
        return true;
    }

    /// Global minimiser on the real line: a coarse scan followed by Newton
    /// polishing of the best bracket.
    std::pair<double, double> global_minimum() const {
        const double r = root_bound();
        const int samples = 4000;
        double best_x = 0.0, best_v = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= samples; ++i) {
            const double x = -r + 2.0 * r * i / samples;
            const double v = value(x);
            if (v < best_v) { best_v = v; best_x = x; }
        }
        double x = best_x;
        for (int it = 0; it < 60; ++it) {
            const double d2 = second_derivative(x);
            if (d2 <= 0.0) break;
            const double step = derivative(x) / d2;
            x -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
        }
        if (value(x) > best_v) x = best_x;
        return {x, value(x)};
    }

    /// Cauchy bound on the critical points, widened so it always brackets
    /// the region where V is below its value at the origin plus one.
    double root_bound() const {
        const auto d = derivative_coeffs();
        double m = 0.0;
        for (std::size_t k = 0; k + 1 < d.size(); ++k) m = std::max(m, std::abs(d[k] / d.back()));
        return 2.0 * (1.0 + m);
    }

private:
    std::vector<double> coeffs_;
};

} // namespace opasym
