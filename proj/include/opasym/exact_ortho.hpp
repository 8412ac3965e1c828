#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

#include "errors.hpp"
#include "numeric.hpp"
#include "potential.hpp"

namespace opasym {

/// Default high-precision real type for the exact engine.
using mp_real = boost::multiprecision::mpfr_float;

/// Sets the default working precision (decimal digits) for the lifetime of
/// the guard. A no-op for built-in floating types.
template <class Real>
class PrecisionScope {
public:
    explicit PrecisionScope(int) {}
};

template <>
class PrecisionScope<mp_real> {
public:
    explicit PrecisionScope(int digits) : saved_(mp_real::default_precision()) {
        mp_real::default_precision(static_cast<unsigned>(digits));
    }
    ~PrecisionScope() { mp_real::default_precision(saved_); }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_;
};

template <class Real>
double to_double(const Real& x) {
    return static_cast<double>(x);
}

/// Composite Gauss-Legendre rule whose weights already contain e^{-N V(x)}.
template <class Real>
struct QuadratureRule {
    std::vector<Real> nodes;
    std::vector<Real> weights;
    double x_lo = 0.0;
    double x_hi = 0.0;
    double target_error = 0.0;
    double achieved_error = 0.0;  // moment change under the last panel doubling
    int digits = 0;
    int N = 0;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Three-term recurrence data for the monic polynomials orthogonal with
/// respect to e^{-N V(x)} dx:  p_{n+1} = (x - a_n) p_n - b_n p_{n-1}.
template <class Real>
struct RecurrenceTable {
    std::vector<Real> a;  // n = 0..n_max
    std::vector<Real> b;  // b[0] unused (0), n = 1..n_max
    std::vector<Real> h;  // squared norms
    int n_max = 0;
    int N = 0;
    int digits = 0;
    double max_offdiag = 0.0;

    double log_h(int n) const { return to_double(log(h.at(static_cast<std::size_t>(n)))); }
};

struct WaveSample {
    int n = 0;
    double xi = 0.0;
    double psi = 0.0;
    double p_value = 0.0;  // may overflow to +-inf for large n; use log_abs_p
    double log_abs_p = 0.0;
    int sign_p = 1;
};

namespace detail {

/// Truncation interval outside which N (V - min V) - deg ln|x| exceeds the
/// given threshold (in nats).
inline std::pair<double, double> truncation_interval(const Potential& pot, int N, int deg, double threshold) {
    const auto [xmin, vmin] = pot.global_minimum();
    auto excess = [&](double x) {
        return N * (pot.value(x) - vmin) - deg * std::log(std::max(1.0, std::abs(x)));
    };
    double R = pot.root_bound() + std::abs(xmin);
    for (int it = 0; it < 200 && !(excess(R) > threshold && excess(-R) > threshold); ++it) R *= 1.5;
    const int samples = 20000;
    double lo = xmin, hi = xmin;
    for (int i = 0; i <= samples; ++i) {
        const double x = -R + 2.0 * R * i / samples;
        if (excess(x) <= threshold) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    const double pad = 2.0 * R / samples;
    lo -= pad;
    hi += pad;
    // tighten both ends by bisection on the monotone tails
    auto refine = [&](double inside, double outside) {
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (inside + outside);
            (excess(mid) <= threshold ? inside : outside) = mid;
        }
        return outside;
    };
    if (excess(lo) > threshold) lo = refine(lo + pad, lo);
    if (excess(hi) > threshold) hi = refine(hi - pad, hi);
    return {lo, hi};
}

template <class Real>
QuadratureRule<Real> composite_rule(const Potential& pot, int N, double lo, double hi, int panels,
                                    const GaussRule<Real>& base) {
    QuadratureRule<Real> q;
    q.x_lo = lo;
    q.x_hi = hi;
    q.N = N;
    const Real width = (Real(hi) - Real(lo)) / panels;
    for (int p = 0; p < panels; ++p) {
        const Real left = Real(lo) + width * p;
        const Real c = left + width / 2, r = width / 2;
        for (std::size_t i = 0; i < base.nodes.size(); ++i) {
            const Real x = c + r * base.nodes[i];
            q.nodes.push_back(x);
            q.weights.push_back(base.weights[i] * r * exp(-Real(N) * pot.value(x)));
        }
    }
    return q;
}

} // namespace detail

/// Quadrature for integrals of x^k e^{-N V(x)}, k <= deg_needed, with relative
/// error about 10^{-(digits-5)}. Panels are doubled until the moments settle.
template <class Real = mp_real>
QuadratureRule<Real> build_weight_quadrature(const Potential& pot, int N, int deg_needed, int digits,
                                             std::size_t node_budget = 60000) {
    PrecisionScope<Real> scope(digits);
    const double threshold = (digits + 10) * std::log(10.0) + 5.0;
    const auto [lo, hi] = detail::truncation_interval(pot, N, deg_needed, threshold);
    const int per_panel = 40;
    const auto base = gauss_legendre<Real>(per_panel);
    const double target = std::pow(10.0, -(digits - 5));

    auto moments = [&](const QuadratureRule<Real>& q) {
        std::vector<Real> m(static_cast<std::size_t>(deg_needed + 1), Real(0)), am = m;
        for (std::size_t j = 0; j < q.size(); ++j) {
            Real xp = q.weights[j];
            Real axp = q.weights[j];
            const Real ax = abs(q.nodes[j]);
            for (int k = 0; k <= deg_needed; ++k) {
                m[static_cast<std::size_t>(k)] += xp;
                am[static_cast<std::size_t>(k)] += axp;
                xp *= q.nodes[j];
                axp *= ax;
            }
        }
        return std::make_pair(m, am);
    };

    int panels = std::max(4, deg_needed / 8);
    auto prev = detail::composite_rule<Real>(pot, N, lo, hi, panels, base);
    auto prev_m = moments(prev);
    while (true) {
        panels *= 2;
        if (static_cast<std::size_t>(panels) * per_panel > node_budget)
            throw numerical_error("precision unachievable with configured node budget (" +
                                  std::to_string(node_budget) + " nodes, " + std::to_string(digits) + " digits)");
        auto cur = detail::composite_rule<Real>(pot, N, lo, hi, panels, base);
        auto cur_m = moments(cur);
        double err = 0.0;
        for (std::size_t k = 0; k < cur_m.first.size(); ++k)
            err = std::max(err, to_double(abs(cur_m.first[k] - prev_m.first[k]) / cur_m.second[k]));
        if (err <= target) {
            cur.target_error = target;
            cur.achieved_error = err;
            cur.digits = digits;
            return cur;
        }
        prev = std::move(cur);
        prev_m = std::move(cur_m);
    }
}

/// Discretised Stieltjes procedure on the quadrature measure.
template <class Real>
RecurrenceTable<Real> compute_recurrence(const QuadratureRule<Real>& rule, int N, int n_max) {
    PrecisionScope<Real> scope(rule.digits);
    RecurrenceTable<Real> t;
    t.n_max = n_max;
    t.N = N;
    t.digits = rule.digits;
    const std::size_t M = rule.size();
    std::vector<Real> p_prev2(M, Real(0)), p_prev(M, Real(0)), p_cur(M, Real(1));
    const double tol = std::pow(10.0, -(rule.digits - 8));
    for (int n = 0; n <= n_max; ++n) {
        Real hn(0), xn(0), c1(0), c2(0);
        for (std::size_t j = 0; j < M; ++j) {
            const Real wp = rule.weights[j] * p_cur[j];
            hn += wp * p_cur[j];
            xn += wp * p_cur[j] * rule.nodes[j];
            if (n >= 1) c1 += wp * p_prev[j];
            if (n >= 2) c2 += wp * p_prev2[j];
        }
        if (!(hn > 0)) throw numerical_error("loss of positivity at n = " + std::to_string(n) + " (insufficient precision)");
        t.h.push_back(hn);
        t.a.push_back(xn / hn);
        if (n == 0) {
            t.b.push_back(Real(0));
        } else {
            const Real bn = hn / t.h[static_cast<std::size_t>(n - 1)];
            if (!(bn > 0)) throw numerical_error("loss of positivity: b_" + std::to_string(n) + " <= 0");
            t.b.push_back(bn);
            t.max_offdiag = std::max(t.max_offdiag, to_double(abs(c1) / sqrt(hn * t.h[static_cast<std::size_t>(n - 1)])));
            if (n >= 2)
                t.max_offdiag =
                    std::max(t.max_offdiag, to_double(abs(c2) / sqrt(hn * t.h[static_cast<std::size_t>(n - 2)])));
        }
        if (t.max_offdiag > tol)
            throw numerical_error("orthogonality lost at n = " + std::to_string(n) + " (insufficient precision)");
        if (n == n_max) break;
        const Real an = t.a.back(), bn = t.b.back();
        std::vector<Real> next(M);
        for (std::size_t j = 0; j < M; ++j) next[j] = (rule.nodes[j] - an) * p_cur[j] - bn * p_prev[j];
        p_prev2 = std::move(p_prev);
        p_prev = std::move(p_cur);
        p_cur = std::move(next);
    }
    return t;
}

/// Convenience: quadrature + recurrence up to n_max at the given precision.
template <class Real = mp_real>
RecurrenceTable<Real> exact_table(const Potential& pot, int N, int n_max, int digits) {
    const auto rule = build_weight_quadrature<Real>(pot, N, 2 * n_max + 2, digits);
    return compute_recurrence(rule, N, n_max);
}

/// Monic values p_0(x) .. p_n(x) by forward recurrence.
template <class Real>
std::vector<Real> eval_monic_all(const RecurrenceTable<Real>& t, const Real& x, int n) {
    if (n > t.n_max) throw error("polynomial index exceeds the recurrence table");
    std::vector<Real> p(static_cast<std::size_t>(n + 1));
    p[0] = Real(1);
    if (n >= 1) p[1] = x - t.a[0];
    for (int k = 1; k < n; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        p[ku + 1] = (x - t.a[ku]) * p[ku] - t.b[ku] * p[ku - 1];
    }
    return p;
}

/// Monic values and first derivatives.
template <class Real>
std::pair<std::vector<Real>, std::vector<Real>> eval_monic_with_derivative(const RecurrenceTable<Real>& t,
                                                                          const Real& x, int n) {
    auto p = eval_monic_all(t, x, n);
    std::vector<Real> d(p.size(), Real(0));
    if (n >= 1) d[1] = Real(1);
    for (int k = 1; k < n; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        d[ku + 1] = p[ku] + (x - t.a[ku]) * d[ku] - t.b[ku] * d[ku - 1];
    }
    return {std::move(p), std::move(d)};
}

/// psi_n(xi) = p_n(xi) e^{-N V(xi)/2} / sqrt(h_n).
template <class Real>
WaveSample eval_wave(const RecurrenceTable<Real>& t, const Potential& pot, int n, double xi) {
    PrecisionScope<Real> scope(t.digits);
    const Real x(xi);
    const auto p = eval_monic_all(t, x, n);
    const Real& pn = p.back();
    WaveSample s;
    s.n = n;
    s.xi = xi;
    s.sign_p = pn < 0 ? -1 : 1;
    s.log_abs_p = pn == 0 ? -std::numeric_limits<double>::infinity() : to_double(log(abs(pn)));
    s.p_value = to_double(pn);
    s.psi = to_double(pn * exp(-Real(t.N) * pot.value(x) / 2) / sqrt(t.h[static_cast<std::size_t>(n)]));
    return s;
}

/// psi_0(xi) .. psi_n(xi) at working precision.
template <class Real>
std::vector<Real> eval_psi_all(const RecurrenceTable<Real>& t, const Potential& pot, const Real& x, int n) {
    auto p = eval_monic_all(t, x, n);
    const Real e = exp(-Real(t.N) * pot.value(x) / 2);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = p[k] * e / sqrt(t.h[k]);
    return p;
}

/// Kernel K(x,y) = sum_{n<N} psi_n(x) psi_n(y), by direct summation.
template <class Real>
double kernel_direct(const RecurrenceTable<Real>& t, const Potential& pot, int N, double x, double y) {
    PrecisionScope<Real> scope(t.digits);
    const auto px = eval_psi_all(t, pot, Real(x), N - 1);
    const auto py = eval_psi_all(t, pot, Real(y), N - 1);
    Real s(0);
    for (int n = 0; n < N; ++n) s += px[static_cast<std::size_t>(n)] * py[static_cast<std::size_t>(n)];
    return to_double(s);
}

/// Christoffel-Darboux form of the kernel in the psi normalisation:
///   K(x,y) = sqrt(b_N) (psi_N(x) psi_{N-1}(y) - psi_{N-1}(x) psi_N(y)) / (x - y),
/// i.e. 1/h_{N-1} in the monic normalisation. For |x - y| below the switch
/// threshold the confluent (Wronskian) form is evaluated at the midpoint.
/// A non-positive `support_width` selects the one-cut estimate 4 sqrt(b_N).
template <class Real>
double kernel_cd(const RecurrenceTable<Real>& t, const Potential& pot, int N, double x, double y,
                 double support_width = -1.0) {
    if (N < 1 || N > t.n_max) throw error("kernel_cd needs a table covering index N");
    PrecisionScope<Real> scope(t.digits);
    const auto Nu = static_cast<std::size_t>(N);
    const Real& hNm1 = t.h[Nu - 1];
    const double width = support_width > 0 ? support_width : 4.0 * std::sqrt(to_double(t.b[Nu]));
    const double threshold = 1e-6 * width;
    if (std::abs(x - y) < threshold) {
        const Real m = (Real(x) + Real(y)) / 2;
        const auto [p, d] = eval_monic_with_derivative(t, m, N);
        const Real w = exp(-Real(t.N) * pot.value(m));
        return to_double(w * (d[Nu] * p[Nu - 1] - d[Nu - 1] * p[Nu]) / hNm1);
    }
    const Real X(x), Y(y);
    const auto px = eval_monic_all(t, X, N);
    const auto py = eval_monic_all(t, Y, N);
    const Real w = exp(-Real(t.N) * (pot.value(X) + pot.value(Y)) / 2);
    return to_double(w * (px[Nu] * py[Nu - 1] - px[Nu - 1] * py[Nu]) / ((X - Y) * hNm1));
}

/// k-point correlation det[K(l_i, l_j)].
template <class Real>
double correlation(const RecurrenceTable<Real>& t, const Potential& pot, int N, const std::vector<double>& points) {
    const std::size_t k = points.size();
    if (k < 1 || static_cast<int>(k) > N) throw error("correlation needs 1 <= |points| <= N");
    PrecisionScope<Real> scope(t.digits);
    std::vector<std::vector<Real>> m(k, std::vector<Real>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) m[i][j] = m[j][i] = Real(kernel_cd(t, pot, N, points[i], points[j]));
    Real det(1);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r)
            if (abs(m[r][c]) > abs(m[piv][c])) piv = r;
        if (m[piv][c] == 0) return 0.0;
        if (piv != c) {
            std::swap(m[piv], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (std::size_t r = c + 1; r < k; ++r) {
            const Real f = m[r][c] / m[c][c];
            for (std::size_t j = c; j < k; ++j) m[r][j] -= f * m[c][j];
        }
    }
    return to_double(det);
}

/// ln Z_N = ln N! + sum_{n<N} ln h_n.
template <class Real>
double log_partition(const RecurrenceTable<Real>& t, int N) {
    if (N < 1 || N - 1 > t.n_max) throw error("log_partition needs h_0 .. h_{N-1}");
    PrecisionScope<Real> scope(t.digits);
    Real s(0);
    for (int n = 0; n < N; ++n) s += log(t.h[static_cast<std::size_t>(n)]);
    return std::lgamma(N + 1.0) + to_double(s);
}

/// Average characteristic polynomial <prod (xi - x_i)> over the n-particle
/// gas Delta^2 prod e^{-N V(x_i)}, by direct tensor quadrature. Only tiny n.
inline double heine_oracle(const Potential& pot, int N, int n, double xi, int panels = 12, int per_panel = 10) {
    if (n < 0) throw error("heine_oracle: n must be >= 0");
    if (n > 4) throw error("heine_oracle: n too large for direct quadrature (n <= 4)");
    if (n == 0) return 1.0;
    const auto [xmin, vmin] = pot.global_minimum();
    const auto [lo, hi] = detail::truncation_interval(pot, N, 2 * n, 45.0);
    (void)xmin;
    const auto& gl = gauss_legendre_cached(per_panel);
    std::vector<double> xs, ws;
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = lo + width * (p + 0.5), r = width / 2;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            xs.push_back(c + r * gl.nodes[i]);
            ws.push_back(gl.weights[i] * r * std::exp(-N * (pot.value(xs.back()) - vmin)));
        }
    }
    const std::size_t m = xs.size();
    // Delta^2 vanishes on coincident nodes, so summing strictly increasing
    // index tuples covers the integral up to the symmetric factor n!, which
    // cancels in the ratio.
    double num = 0.0, den = 0.0;
    std::vector<std::size_t> idx(static_cast<std::size_t>(n));
    std::function<void(int, std::size_t, double, double)> rec = [&](int depth, std::size_t start, double w, double charp) {
        if (depth == n) {
            num += w * charp;
            den += w;
            return;
        }
        for (std::size_t i = start; i < m; ++i) {
            double vw = ws[i];
            for (int d = 0; d < depth; ++d) {
                const double diff = xs[i] - xs[idx[static_cast<std::size_t>(d)]];
                vw *= diff * diff;
            }
            idx[static_cast<std::size_t>(depth)] = i;
            rec(depth + 1, i + 1, w * vw, charp * (xi - xs[i]));
        }
    };
    rec(0, 0, 1.0, 1.0);
    return num / den;
}

} // namespace opasym
