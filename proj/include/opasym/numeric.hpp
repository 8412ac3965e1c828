#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"

namespace opasym {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

template <class Real>
struct GaussRule {
    std::vector<Real> nodes;   // on [-1, 1], increasing
    std::vector<Real> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] computed by Newton iteration on the
/// Legendre recurrence at the working precision of Real.
template <class Real>
GaussRule<Real> gauss_legendre(int n) {
    using std::abs;
    using std::cos;
    GaussRule<Real> rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const Real one(1);
    const Real eps = [] {
        Real e(1);
        // Smallest power of two that still changes 1 at this precision.
        while (Real(1) + e / 2 != Real(1)) e /= 2;
        return e;
    }();
    for (int i = 0; i < (n + 1) / 2; ++i) {
        Real x(std::cos(pi * (i + 0.75) / (n + 0.5)));
        Real dp(0);
        for (int it = 0; it < 100; ++it) {
            Real p0(1), p1 = x;
            for (int k = 2; k <= n; ++k) {
                Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = Real(1);
            dp = n * (x * p1 - p0) / (x * x - one);
            const Real step = p1 / dp;
            x -= step;
            if (abs(step) <= 4 * eps) {
                // one more pass for the derivative at the converged node
                p0 = Real(1);
                p1 = x;
                for (int k = 2; k <= n; ++k) {
                    Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - one);
                break;
            }
        }
        const Real w = Real(2) / ((one - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = Real(0);
    return rule;
}

/// Cached double-precision Gauss-Legendre rule.
inline const GaussRule<double>& gauss_legendre_cached(int n) {
    static std::mutex mtx;
    static std::map<int, GaussRule<double>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre<double>(n)).first;
    return it->second;
}

/// Fixed-order Gauss-Legendre on [a, b] for smooth integrands.
template <class F>
auto integrate_gl(F&& f, double a, double b, int n) -> decltype(f(a)) {
    const auto& rule = gauss_legendre_cached(n);
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    decltype(f(a)) acc{};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(c + r * rule.nodes[i]);
    return acc * r;
}

/// Adaptive Gauss-Kronrod (G15/K31) with relative tolerance; the integrand
/// may be real or complex valued.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, double tol = 1e-13, unsigned depth = 18)
    -> decltype(f(a)) {
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, depth, tol, &err);
}

/// Integral over [a, b] of an integrand with (inverse) square-root behaviour
/// at both ends. Uses x = (a+b)/2 - (b-a)/2 cos(t), which turns such
/// endpoint behaviour into a smooth integrand in t.
template <class F>
auto integrate_sqrt_ends(F&& f, double a, double b, double tol = 1e-13) -> decltype(f(a)) {
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    auto g = [&](double t) { return f(c - r * std::cos(t)) * (r * std::sin(t)); };
    return integrate_adaptive(g, 0.0, pi, tol);
}

/// Integral along the straight segment z0 -> z1 in the complex plane where the
/// integrand may have a square-root branch point at z0 (x = z0 + (z1-z0) t^2).
template <class F>
cplx integrate_from_branch(F&& f, cplx z0, cplx z1, double tol = 1e-13) {
    const cplx d = z1 - z0;
    auto g = [&](double t) -> cplx { return f(z0 + d * (t * t)) * (2.0 * t) * d; };
    return integrate_adaptive(g, 0.0, 1.0, tol);
}

/// Straight segment z0 -> z1 with no endpoint singularity.
template <class F>
cplx integrate_segment(F&& f, cplx z0, cplx z1, double tol = 1e-13) {
    const cplx d = z1 - z0;
    auto g = [&](double t) -> cplx { return f(z0 + d * t) * d; };
    return integrate_adaptive(g, 0.0, 1.0, tol);
}

/// Damped Newton iteration for small square systems with a finite-difference
/// Jacobian. The residual callback returns the residual vector.
struct NewtonResult {
    std::vector<double> x;
    std::vector<double> residual;
    int iterations = 0;
    bool converged = false;
};

template <class Residual>
NewtonResult newton_solve(Residual&& residual, std::vector<double> x0, double tol = 1e-14, int max_iter = 100,
                          double fd_step = 1e-7);

/// Dense LU with partial pivoting for small systems.
template <class T>
std::vector<T> solve_dense(std::vector<std::vector<T>> a, std::vector<T> b) {
    using std::abs;
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (abs(a[i][k]) > abs(a[piv][k])) piv = i;
        if (abs(a[piv][k]) == 0.0) throw numerical_error("singular linear system");
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const T m = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= m * a[k][j];
            b[i] -= m * b[k];
        }
    }
    std::vector<T> x(n);
    for (std::size_t i = n; i-- > 0;) {
        T s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

template <class Residual>
NewtonResult newton_solve(Residual&& residual, std::vector<double> x0, double tol, int max_iter, double fd_step) {
    NewtonResult out;
    out.x = std::move(x0);
    const std::size_t n = out.x.size();
    auto norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double e : v) s += e * e;
        return std::sqrt(s);
    };
    std::vector<double> r;
    try {
        r = residual(out.x);
    } catch (const numerical_error&) {
        out.residual.assign(n, std::numeric_limits<double>::infinity());
        return out;
    }
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it;
        const double rn = norm(r);
        if (!std::isfinite(rn)) break;
        if (rn <= tol) {
            out.converged = true;
            break;
        }
        std::vector<std::vector<double>> J(n, std::vector<double>(n));
        bool jac_ok = true;
        for (std::size_t j = 0; j < n && jac_ok; ++j) {
            const double h = fd_step * std::max(1.0, std::abs(out.x[j]));
            auto xp = out.x, xm = out.x;
            xp[j] += h;
            xm[j] -= h;
            try {
                const auto rp = residual(xp), rm = residual(xm);
                for (std::size_t i = 0; i < n; ++i) J[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            } catch (const numerical_error&) {
                jac_ok = false;
            }
        }
        if (!jac_ok) break;
        std::vector<double> minus_r(n);
        for (std::size_t i = 0; i < n; ++i) minus_r[i] = -r[i];
        std::vector<double> dx;
        try {
            dx = solve_dense(J, minus_r);
        } catch (const numerical_error&) {
            break;
        }
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            auto xt = out.x;
            for (std::size_t i = 0; i < n; ++i) xt[i] += lambda * dx[i];
            try {
                auto rt = residual(xt);
                if (norm(rt) < (1.0 - 1e-4 * lambda) * rn || (ls == 29 && std::isfinite(norm(rt)))) {
                    out.x = std::move(xt);
                    r = std::move(rt);
                    accepted = true;
                    break;
                }
            } catch (const numerical_error&) {
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
        // Stagnation at roundoff level.
        if (lambda * norm(dx) < 1e-16 * (1.0 + norm(out.x)) && norm(r) < 1e3 * tol) {
            out.converged = true;
            break;
        }
    }
    out.residual = r;
    if (!out.converged && norm(r) <= tol) out.converged = true;
    return out;
}

} // namespace opasym
