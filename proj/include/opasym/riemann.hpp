#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equilibrium.hpp"
#include "errors.hpp"
#include "numeric.hpp"

namespace opasym {

using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;

/// A point of the two-sheeted curve y^2 = sigma(x). Real x on a cut denotes
/// the boundary value from the upper half plane.
struct SurfacePoint {
    cplx x;
    int sheet = 1;  // +1 physical, -1 second
    bool infinite = false;

    static SurfacePoint at(cplx x, int sheet = 1) { return {x, sheet, false}; }
    static SurfacePoint infinity(int sheet) { return {cplx(0.0), sheet, true}; }
    SurfacePoint involution() const { return {x, -sheet, infinite}; }
};

class SpectralCurve {
public:
    explicit SpectralCurve(std::vector<double> roots) : roots_(std::move(roots)) {
        if (roots_.size() < 4 || roots_.size() % 2 != 0)
            throw error("spectral curve needs an even number (>= 4) of branch points");
        for (std::size_t i = 1; i < roots_.size(); ++i)
            if (!(roots_[i] > roots_[i - 1])) throw error("branch points must be real, distinct and increasing");
        for (double r : roots_) rmax_ = std::max(rmax_, std::abs(r));
    }
    static SpectralCurve from_measure(const EquilibriumMeasure& m) { return SpectralCurve(m.roots()); }

    int s() const noexcept { return static_cast<int>(roots_.size()) / 2; }
    int genus() const noexcept { return s() - 1; }
    const std::vector<double>& roots() const noexcept { return roots_; }
    double a(int k) const { return roots_.at(static_cast<std::size_t>(2 * k)); }
    double b(int k) const { return roots_.at(static_cast<std::size_t>(2 * k + 1)); }
    double max_abs_root() const noexcept { return rmax_; }

    /// sqrt(sigma) on the physical sheet; real x uses the upper boundary value.
    cplx sqrt_sigma(cplx x) const {
        if (x.imag() == 0.0) return sqrt_sigma_boundary(roots_, x.real(), 1);
        return opasym::sqrt_sigma(roots_, x);
    }
    cplx y(const SurfacePoint& p) const {
        if (p.infinite) throw error("y is infinite at infinity");
        return static_cast<double>(p.sheet) * sqrt_sigma(p.x);
    }

private:
    std::vector<double> roots_;
    double rmax_ = 0.0;
};

struct CycleDescriptor {
    char kind;  // 'A' or 'B'
    int index;  // 0-based
    std::string description;
};

/// A_i encircles cut i counter-clockwise on the physical sheet (i = 0..g-1).
/// B_i runs on the physical sheet from cut s-1 to cut i along the real axis
/// and returns on the second sheet; only the gaps contribute. A_i . B_j = delta_ij.
inline std::vector<CycleDescriptor> build_homology(const SpectralCurve& c) {
    std::vector<CycleDescriptor> out;
    for (int i = 0; i < c.genus(); ++i)
        out.push_back({'A', i, "counter-clockwise loop around [" + std::to_string(c.a(i)) + ", " + std::to_string(c.b(i)) + "]"});
    for (int i = 0; i < c.genus(); ++i)
        out.push_back({'B', i, "gaps from " + std::to_string(c.b(i)) + " to " + std::to_string(c.a(c.s() - 1)) + ", both sheets"});
    return out;
}

namespace detail {

/// int_lo^hi f(x) / sqrt|sigma(x)| dx for consecutive roots lo < hi. With
/// x = c - r cos t the factor sqrt((x - lo)(hi - x)) dx becomes dt.
inline cplx inverse_sqrt_between(const SpectralCurve& c, std::size_t k, const std::function<cplx(double)>& f) {
    const auto& roots = c.roots();
    const double lo = roots[k], hi = roots[k + 1];
    const double mid = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    auto g = [&](double t) -> cplx {
        const double x = mid - r * std::cos(t);
        double rest = 1.0;
        for (std::size_t j = 0; j < roots.size(); ++j)
            if (j != k && j != k + 1) rest *= std::sqrt(std::abs(x - roots[j]));
        return f(x) / rest;
    };
    return integrate_adaptive(g, 0.0, pi, 1e-13);
}

/// Sign of sqrt(sigma) on the gap above root index k (between roots k and k+1, k odd).
inline double gap_sign(const SpectralCurve& c, std::size_t k) {
    const auto& roots = c.roots();
    return sqrt_sigma_boundary(roots, 0.5 * (roots[k] + roots[k + 1]), 1).real() > 0 ? 1.0 : -1.0;
}

} // namespace detail

/// Contour integral of f(x) dx / y over A_k. For f regular on the cut,
/// int_{A_k} f dx/y = 2i (-1)^{s-1-k} int_{a_k}^{b_k} f / sqrt|sigma| dx.
inline cplx a_period(const SpectralCurve& c, int k, const std::function<cplx(double)>& f) {
    const double sign = ((c.s() - 1 - k) % 2 == 0) ? 1.0 : -1.0;
    return cplx(0.0, 2.0 * sign) * detail::inverse_sqrt_between(c, static_cast<std::size_t>(2 * k), f);
}

/// Integral of f(x) dx / y along the real axis from b_i to a_{s-1}, gaps only.
inline cplx gap_integral(const SpectralCurve& c, int i, const std::function<cplx(double)>& f) {
    cplx acc(0.0);
    for (int k = i; k + 1 < c.s(); ++k) {
        const auto idx = static_cast<std::size_t>(2 * k + 1);
        acc += detail::gap_sign(c, idx) * detail::inverse_sqrt_between(c, idx, f);
    }
    return acc;
}

struct PeriodData {
    cmat holo_coeffs;  // du_i = sum_j holo_coeffs(i,j) x^j dx / y
    cmat a_periods;    // A_k periods of the monomial basis: P(k, j)
    cmat tau;
    double asymmetry = 0.0;
    double normalization_residual = 0.0;
    SurfacePoint base_point;
};

inline PeriodData holo_basis(const SpectralCurve& c) {
    const int g = c.genus();
    PeriodData pd;
    pd.a_periods.resize(g, g);
    for (int k = 0; k < g; ++k)
        for (int j = 0; j < g; ++j) pd.a_periods(k, j) = a_period(c, k, [j](double x) { return cplx(std::pow(x, j)); });
    Eigen::JacobiSVD<cmat> svd(pd.a_periods);
    const double cond = svd.singularValues()(0) / svd.singularValues()(g - 1);
    if (!(cond < 1e12)) throw numerical_error("ill-conditioned A-period matrix (near-degenerate cuts), cond = " + std::to_string(cond));
    // sum_j C(i,j) P(k,j) = delta_ik
    pd.holo_coeffs = pd.a_periods.transpose().inverse();
    const cmat check = pd.holo_coeffs * pd.a_periods.transpose();
    pd.normalization_residual = (check - cmat::Identity(g, g)).cwiseAbs().maxCoeff();
    pd.base_point = SurfacePoint::at(cplx(c.b(c.s() - 1), 0.0), 1);
    return pd;
}

/// tau_ij = B_i period of du_j = -2 int_{b_i}^{a_{s-1}} du_j (gaps).
inline void period_matrix(const SpectralCurve& c, PeriodData& pd) {
    const int g = c.genus();
    cmat Bmono(g, g);  // B_i period of x^j dx / y
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) Bmono(i, j) = -2.0 * gap_integral(c, i, [j](double x) { return cplx(std::pow(x, j)); });
    cmat tau = Bmono * pd.holo_coeffs.transpose();
    pd.asymmetry = (tau - tau.transpose()).cwiseAbs().maxCoeff();
    if (pd.asymmetry > 1e-6) throw numerical_error("period matrix asymmetry " + std::to_string(pd.asymmetry) + " (integration failure)");
    pd.tau = 0.5 * (tau + tau.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pd.tau.imag());
    if (!(es.eigenvalues().minCoeff() > 0)) throw numerical_error("Im tau is not positive definite");
}

inline PeriodData compute_periods(const SpectralCurve& c) {
    auto pd = holo_basis(c);
    period_matrix(c, pd);
    return pd;
}

/// Symplectic swap A' = B, B' = -A: tau' = -tau^{-1} and du' = tau^{-1} du.
/// A closing gap is then an A-cycle, so Lambda and H reach their genus-0
/// limit as the gap shrinks.
inline PeriodData swap_cycles(const PeriodData& pd) {
    PeriodData out = pd;
    const cmat inv = pd.tau.inverse();
    out.holo_coeffs = inv * pd.holo_coeffs;
    out.tau = -inv;
    out.tau = 0.5 * (out.tau + out.tau.transpose());
    return out;
}

/// Coefficients of du_i / dx at p.
inline cvec du_dx(const SpectralCurve& c, const PeriodData& pd, const SurfacePoint& p) {
    if (p.infinite) return cvec::Zero(c.genus());
    const int g = c.genus();
    cvec mono(g);
    for (int j = 0; j < g; ++j) mono(j) = std::pow(p.x, j);
    return pd.holo_coeffs * mono / c.y(p);
}

namespace detail {

/// int of z^j / sqrt(sigma(z)) along the straight segment from roots[k] to x.
/// With z = r_k + d t^2 the factor sqrt(z - r_k) = sqrt(d) t is taken out exactly.
inline cplx from_root(const SpectralCurve& c, std::size_t k, int j, cplx x) {
    const auto& roots = c.roots();
    const cplx z0(roots[k], 0.0);
    const cplx d = x - z0;
    if (d == 0.0) return cplx(0.0);
    const cplx sd = std::sqrt(d);
    const bool real_path = x.imag() == 0.0;
    auto g = [&](double t) -> cplx {
        const cplx z = z0 + d * (t * t);
        cplx rest(1.0);
        for (std::size_t i = 0; i < roots.size(); ++i) {
            if (i == k) continue;
            if (real_path) {
                const double dz = z.real() - roots[i];
                rest *= dz >= 0 ? cplx(std::sqrt(dz), 0.0) : cplx(0.0, std::sqrt(-dz));
            }
            else rest *= std::sqrt(z - roots[i]);
        }
        return 2.0 * sd * std::pow(z, j) / rest;
    };
    return integrate_adaptive(g, 0.0, 1.0, 1e-13);
}

/// int of x^j / sqrt(sigma) (physical sheet) from the base point b_{s-1} to x, j = 0..g-1.
/// Real x is reached along the upper side of the real axis, complex x along a segment.
inline cvec monomial_abel(const SpectralCurve& c, cplx x) {
    const int g = c.genus();
    const auto& roots = c.roots();
    const std::size_t last = roots.size() - 1;
    cvec out = cvec::Zero(g);
    for (int j = 0; j < g; ++j) {
        if (x.imag() != 0.0 || x.real() >= roots[last]) {
            out(j) = from_root(c, last, j, x);
            continue;
        }
        const double xr = x.real();
        cplx acc(0.0);
        for (std::size_t k = last; k-- > 0;) {
            const double lo = roots[k], hi = roots[k + 1];
            if (xr > lo) {
                // start from the nearer end of the interval
                if (k > 0 && xr - lo < hi - xr) {
                    const cplx whole = inverse_sqrt_between(c, k, [j](double t) { return cplx(std::pow(t, j)); });
                    const double m = 0.5 * (lo + hi);
                    const cplx phase = sqrt_sigma_boundary(roots, m, 1) / sigma_abs_sqrt(roots, m);
                    acc += -whole / phase + from_root(c, k, j, x);
                } else {
                    acc += from_root(c, k + 1, j, x);
                }
                break;
            }
            const double m = 0.5 * (lo + hi);
            const cplx phase = sqrt_sigma_boundary(roots, m, 1) / sigma_abs_sqrt(roots, m);
            acc -= inverse_sqrt_between(c, k, [j](double t) { return cplx(std::pow(t, j)); }) / phase;
            if (xr == lo) break;
            if (k == 0) acc += from_root(c, 0, j, x);
        }
        out(j) = acc;
    }
    return out;
}

/// int from b_{s-1} to +infinity on the physical sheet.
inline cvec monomial_abel_infinity(const SpectralCurve& c) {
    const int g = c.genus();
    const double R = 10.0 * std::max(1.0, c.max_abs_root());
    cvec out = monomial_abel(c, cplx(R, 0.0));
    for (int j = 0; j < g; ++j) {
        // x = R / v, dx = -R / v^2 dv; integrand ~ x^{j-s} decays at least like x^{-2}
        auto tail = [&](double v) -> double {
            if (v == 0.0) return (j == c.s() - 2) ? 1.0 : 0.0;
            const double x = R / v;
            return (std::pow(x, j) / c.sqrt_sigma(cplx(x, 0.0)).real()) * R / (v * v);
        };
        out(j) += integrate_adaptive(tail, 0.0, 1.0, 1e-13);
    }
    return out;
}

} // namespace detail

/// Abel map from the base point b_{s-1}: u(p-bar) = -u(p), u(inf-) = -u(inf+).
inline cvec abel_map(const SpectralCurve& c, const PeriodData& pd, const SurfacePoint& p) {
    const cvec mono = p.infinite ? detail::monomial_abel_infinity(c) : detail::monomial_abel(c, p.x);
    return static_cast<double>(p.sheet) * (pd.holo_coeffs * mono);
}

// ---------------------------------------------------------------------------
// Theta functions

class ThetaContext {
public:
    ThetaContext(cmat tau, double target_tol = 1e-14) : tau_(std::move(tau)), tol_(target_tol) {
        const int g = static_cast<int>(tau_.rows());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tau_.imag());
        lambda_min_ = es.eigenvalues().minCoeff();
        if (!(lambda_min_ > 0)) throw numerical_error("Im tau is not positive definite");
        // Gaussian tail bound exp(-pi lambda_min (R - 1/2)^2) < tol / 10
        const double r = 0.5 + std::sqrt(std::log(10.0 / tol_) / (pi * lambda_min_));
        radius_ = static_cast<int>(std::ceil(r));
        if (std::pow(2.0 * radius_ + 1.0, g) > 5e7)
            throw numerical_error("theta truncation needs radius " + std::to_string(radius_) + " in genus " + std::to_string(g) +
                                  " (Im tau too small for the target tolerance)");
        im_inv_ = tau_.imag().inverse();
        m1_ = m2_ = Eigen::VectorXi::Zero(g);
        set_characteristic(first_odd_characteristic(g, 0));
    }

    int genus() const { return static_cast<int>(tau_.rows()); }
    const cmat& tau() const { return tau_; }
    int radius() const { return radius_; }
    double target_tol() const { return tol_; }
    double lambda_min() const { return lambda_min_; }
    const Eigen::VectorXi& m1() const { return m1_; }
    const Eigen::VectorXi& m2() const { return m2_; }

    /// Odd characteristics (m1, m2) in {0,1}^g x {0,1}^g with m1.m2 odd, lexicographic.
    static std::vector<std::pair<Eigen::VectorXi, Eigen::VectorXi>> odd_characteristics(int g) {
        std::vector<std::pair<Eigen::VectorXi, Eigen::VectorXi>> out;
        for (int bits = 0; bits < (1 << (2 * g)); ++bits) {
            Eigen::VectorXi a(g), b(g);
            for (int i = 0; i < g; ++i) {
                a(i) = (bits >> (2 * g - 1 - i)) & 1;
                b(i) = (bits >> (g - 1 - i)) & 1;
            }
            if (a.dot(b) % 2 == 1) out.emplace_back(a, b);
        }
        return out;
    }
    static std::pair<Eigen::VectorXi, Eigen::VectorXi> first_odd_characteristic(int g, std::size_t index) {
        return odd_characteristics(g).at(index);
    }
    void set_characteristic(const std::pair<Eigen::VectorXi, Eigen::VectorXi>& ch) {
        if (ch.first.dot(ch.second) % 2 != 1) throw error("even characteristic supplied (m1.m2 must be odd)");
        m1_ = ch.first;
        m2_ = ch.second;
        z_ = 0.5 * (m1_.cast<cplx>() + tau_ * m2_.cast<cplx>());
    }
    const cvec& z() const { return z_; }

    /// log theta(u) after reduction of u into the fundamental cell.
    cplx log_theta(const cvec& u) const {
        cplx shift;
        cvec ur = reduce(u, shift);
        const cplx s = raw_sum(ur, nullptr);
        return std::log(s) + shift;
    }
    cplx theta(const cvec& u) const { return std::exp(log_theta(u)); }

    cvec grad_theta(const cvec& u) const {
        cplx shift;
        Eigen::VectorXd n;
        cvec ur = reduce(u, shift, &n);
        cvec grad(genus());
        const cplx s = raw_sum(ur, &grad);
        const cplx f = std::exp(shift);
        return f * (grad - cplx(0.0, 2.0 * pi) * n.cast<cplx>() * s);
    }

    /// theta_z(u) = exp(i pi m2.u + i pi/4 m2.tau.m2 + i pi/2 m1.m2) theta(u + z)
    cplx log_theta_char(const cvec& u) const { return char_prefactor(u) + log_theta(u + z_); }
    cplx theta_char(const cvec& u) const { return std::exp(log_theta_char(u)); }
    cvec grad_theta_char(const cvec& u) const {
        const cplx pre = std::exp(char_prefactor(u));
        const cvec v = u + z_;
        return pre * (cplx(0.0, pi) * m2_.cast<cplx>() * theta(v) + grad_theta(v));
    }

    /// Theta with real characteristic shift: sum_m exp(i pi (m+d).tau.(m+d) + 2 i pi (m+d).u).
    cplx log_theta_shifted(const Eigen::VectorXd& d, const cvec& u) const {
        const cvec dc = d.cast<cplx>();
        return cplx(0.0, pi) * dc.dot(tau_ * dc) + cplx(0.0, 2.0 * pi) * dc.dot(u) + log_theta(u + tau_ * dc);
    }

private:
    cplx char_prefactor(const cvec& u) const {
        const cvec m2c = m2_.cast<cplx>();
        return cplx(0.0, pi) * (m2c.transpose() * u)(0) + cplx(0.0, pi / 4) * (m2c.transpose() * tau_ * m2c)(0) +
               cplx(0.0, pi / 2) * static_cast<double>(m1_.dot(m2_));
    }

    /// u = a + tau b; b is shifted by an integer vector n into [-1/2, 1/2)
    /// and a reduced mod 1. Returns the reduced point and the log factor.
    cvec reduce(const cvec& u, cplx& log_factor, Eigen::VectorXd* n_out = nullptr) const {
        const Eigen::VectorXd b = im_inv_ * u.imag();
        Eigen::VectorXd n = b.array().round().matrix();
        const cvec nc = n.cast<cplx>();
        cvec up = u - tau_ * nc;
        // theta(u' + tau n) = exp(-i pi (2 n.u' + n.tau.n)) theta(u')
        log_factor = cplx(0.0, -pi) * (2.0 * (nc.transpose() * up)(0) + (nc.transpose() * tau_ * nc)(0));
        for (int i = 0; i < up.size(); ++i) up(i) -= std::round(up(i).real());
        if (n_out) *n_out = n;
        return up;
    }

    cplx raw_sum(const cvec& u, cvec* grad) const {
        const int g = genus();
        std::vector<int> m(static_cast<std::size_t>(g), -radius_);
        cplx sum(0.0);
        if (grad) grad->setZero();
        cvec mv(g);
        while (true) {
            for (int i = 0; i < g; ++i) mv(i) = m[static_cast<std::size_t>(i)];
            const cplx e = std::exp(cplx(0.0, pi) * (mv.transpose() * tau_ * mv)(0) + cplx(0.0, 2.0 * pi) * (mv.transpose() * u)(0));
            sum += e;
            if (grad) *grad += cplx(0.0, 2.0 * pi) * mv * e;
            int k = 0;
            while (k < g && ++m[static_cast<std::size_t>(k)] > radius_) m[static_cast<std::size_t>(k++)] = -radius_;
            if (k == g) break;
        }
        return sum;
    }

    cmat tau_;
    double tol_;
    double lambda_min_ = 0.0;
    int radius_ = 0;
    Eigen::MatrixXd im_inv_;
    Eigen::VectorXi m1_, m2_;
    cvec z_;
};

/// Gradient of theta_z at 0.
inline cvec theta_char_gradient0(const ThetaContext& ctx) { return ctx.grad_theta_char(cvec::Zero(ctx.genus())); }

/// dh_z / dx at p.
inline cplx dh_z(const ThetaContext& ctx, const SpectralCurve& c, const PeriodData& pd, const SurfacePoint& p) {
    return theta_char_gradient0(ctx).transpose() * du_dx(c, pd, p);
}

/// Picks the first odd characteristic with |grad theta_z(0)| and |dh_z| at the
/// given points above 1e-6.
inline void choose_characteristic(ThetaContext& ctx, const SpectralCurve& c, const PeriodData& pd,
                                  const std::vector<SurfacePoint>& points = {}) {
    for (const auto& ch : ThetaContext::odd_characteristics(ctx.genus())) {
        ctx.set_characteristic(ch);
        if (theta_char_gradient0(ctx).norm() < 1e-6) continue;
        bool ok = true;
        for (const auto& p : points)
            if (!p.infinite && std::abs(dh_z(ctx, c, pd, p)) < 1e-6) ok = false;
        if (ok) return;
    }
    throw numerical_error("no odd characteristic with non-vanishing dh_z at the requested points");
}

/// Prime form E(p,q) = theta_z(u(p)-u(q)) / sqrt(dh_z(p) dh_z(q)) in the local coordinate x.
inline cplx prime_form(const ThetaContext& ctx, const SpectralCurve& c, const PeriodData& pd, const SurfacePoint& p,
                       const SurfacePoint& q) {
    const cplx hp = dh_z(ctx, c, pd, p), hq = dh_z(ctx, c, pd, q);
    if (std::abs(hp) < 1e-12 || std::abs(hq) < 1e-12) throw numerical_error("dh_z vanishes at the point; choose another characteristic");
    return ctx.theta_char(abel_map(c, pd, p) - abel_map(c, pd, q)) / std::sqrt(hp * hq);
}

// ---------------------------------------------------------------------------
// Third-kind differentials

namespace detail {

/// Elementary third-kind differential with residue +1 at q and -1/2 at each of infinity+-.
inline cplx elementary_third_kind(const SpectralCurve& c, const SurfacePoint& q, const SurfacePoint& p) {
    const cplx yp = c.y(p);
    if (q.infinite) {
        // -/+ (1/2) x^{s-1} / y
        return -0.5 * static_cast<double>(q.sheet) * std::pow(p.x, c.s() - 1) / yp;
    }
    const cplx yq = c.y(q);
    return (yp + yq) / (2.0 * yp * (p.x - q.x));
}

inline cvec elementary_a_periods(const SpectralCurve& c, const SurfacePoint& q) {
    const int g = c.genus();
    cvec out(g);
    for (int k = 0; k < g; ++k) {
        if (q.infinite) {
            out(k) = -0.5 * static_cast<double>(q.sheet) * a_period(c, k, [&](double x) { return cplx(std::pow(x, c.s() - 1)); });
        } else {
            if (q.x.imag() == 0.0 && q.x.real() >= c.a(k) && q.x.real() <= c.b(k))
                throw numerical_error("third-kind pole on an A-cycle");
            const cplx yq = c.y(q);
            out(k) = 0.5 * yq * a_period(c, k, [&](double x) { return 1.0 / (x - q.x); });
        }
    }
    return out;
}

} // namespace detail

struct ThirdKind {
    SurfacePoint q1, q2;
    cvec correction;  // coefficients of du_i subtracted to kill A-periods
};

inline ThirdKind third_kind(const SpectralCurve& c, const SurfacePoint& q1, const SurfacePoint& q2) {
    ThirdKind t{q1, q2, detail::elementary_a_periods(c, q1) - detail::elementary_a_periods(c, q2)};
    return t;
}

/// dS_{q1,q2}(p) / dx.
inline cplx third_kind_dS(const SpectralCurve& c, const PeriodData& pd, const ThirdKind& t, const SurfacePoint& p) {
    return detail::elementary_third_kind(c, t.q1, p) - detail::elementary_third_kind(c, t.q2, p) -
           (t.correction.transpose() * du_dx(c, pd, p))(0);
}

inline cplx third_kind_dS(const SpectralCurve& c, const PeriodData& pd, const SurfacePoint& q1, const SurfacePoint& q2,
                          const SurfacePoint& p) {
    return third_kind_dS(c, pd, third_kind(c, q1, q2), p);
}

// ---------------------------------------------------------------------------
// Lambda and H in genus g

struct GenusGData {
    cvec u_inf_plus;
    cvec u_inf_minus;
    cplx gamma;
    cplx theta_inf;  // theta_z(u(inf+) - u(inf-))
};

inline GenusGData genus_g_data(const ThetaContext& ctx, const SpectralCurve& c, const PeriodData& pd) {
    GenusGData d;
    d.u_inf_plus = abel_map(c, pd, SurfacePoint::infinity(1));
    d.u_inf_minus = -d.u_inf_plus;
    d.theta_inf = ctx.theta_char(d.u_inf_plus - d.u_inf_minus);
    // x theta_z(u(p) - u(inf+)) -> -L_{g-1}, with dh_z/dx = L(x)/y
    const cvec grad = theta_char_gradient0(ctx);
    const int g = c.genus();
    const cplx lead = (grad.transpose() * pd.holo_coeffs.col(g - 1))(0);
    d.gamma = -lead / d.theta_inf;
    return d;
}

inline LambdaH lambda_h_genusg(const ThetaContext& ctx, const SpectralCurve& c, const PeriodData& pd, const GenusGData& d,
                               const SurfacePoint& p, const cvec* u_p = nullptr) {
    const cvec up = u_p ? *u_p : abel_map(c, pd, p);
    const cvec upbar = -up;
    LambdaH out;
    out.Lambda = d.gamma * std::exp(ctx.log_theta_char(up - d.u_inf_minus) - ctx.log_theta_char(up - d.u_inf_plus));
    out.H = std::exp(ctx.log_theta_char(up - d.u_inf_minus) + ctx.log_theta_char(d.u_inf_plus - upbar) -
                     ctx.log_theta_char(up - upbar) - ctx.log_theta_char(d.u_inf_plus - d.u_inf_minus));
    return out;
}

/// Second expression for H: -gamma theta_z(u+ - u-) / theta_z(u(p) - u+)^2 dh_z(p)/dx.
inline cplx h_from_dh(const ThetaContext& ctx, const SpectralCurve& c, const PeriodData& pd, const GenusGData& d,
                      const SurfacePoint& p) {
    const cvec up = abel_map(c, pd, p);
    const cplx t = ctx.theta_char(up - d.u_inf_plus);
    return -d.gamma * d.theta_inf / (t * t) * dh_z(ctx, c, pd, p);
}

} // namespace opasym
