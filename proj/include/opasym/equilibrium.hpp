#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "potential.hpp"

namespace opasym {

struct Cut {
    double a = 0.0;
    double b = 0.0;
    double width() const noexcept { return b - a; }
    bool contains(double x) const noexcept { return x > a && x < b; }
};

/// Logarithmic point charge: V_h(x) = V(x) - h ln(xi - x), xi real and off the support.
struct LogCharge {
    double h = 0.0;
    double xi = 0.0;
};

struct EquilibriumMeasure {
    std::vector<Cut> cuts;
    std::vector<double> M;         // polynomial part, lowest degree first
    std::vector<double> fillings;  // eps_i, summing to T
    double T = 1.0;
    std::optional<LogCharge> charge;
    std::optional<double> veff_right;  // V_eff(b_s), normalised at infinity; filled by the solver

    int s() const noexcept { return static_cast<int>(cuts.size()); }
    int genus() const noexcept { return s() - 1; }
    std::vector<double> roots() const {
        std::vector<double> r;
        for (const auto& c : cuts) {
            r.push_back(c.a);
            r.push_back(c.b);
        }
        return r;
    }
    double left() const { return cuts.front().a; }
    double right() const { return cuts.back().b; }
};

/// Lambda(p) and H(p) of the asymptotic formulas.
struct LambdaH {
    cplx Lambda;
    cplx H;
};

enum class Regime { outside, on_cut, excluded_edge };

struct RegimeTag {
    Regime kind = Regime::outside;
    int cut = -1;  // 0-based cut index when on_cut
};

inline const char* regime_name(Regime r) {
    switch (r) {
    case Regime::outside: return "outside";
    case Regime::on_cut: return "on_cut";
    case Regime::excluded_edge: return "excluded_edge";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// sqrt(sigma) with cuts exactly on the intervals and sqrt(sigma) ~ x^s at +inf

/// Product of principal square roots sqrt(x - r_j).
inline cplx sqrt_sigma(const std::vector<double>& roots, cplx x) {
    cplx p(1.0, 0.0);
    for (double r : roots) p *= std::sqrt(x - r);
    return p;
}

/// Boundary value at real x from above (side = +1) or below (side = -1).
inline cplx sqrt_sigma_boundary(const std::vector<double>& roots, double x, int side) {
    cplx p(1.0, 0.0);
    for (double r : roots) {
        if (x >= r) p *= std::sqrt(x - r);
        else p *= cplx(0.0, side * std::sqrt(r - x));
    }
    return p;
}

inline double sigma_abs_sqrt(const std::vector<double>& roots, double x) {
    double p = 1.0;
    for (double r : roots) p *= std::sqrt(std::abs(x - r));
    return p;
}

template <class X>
X poly_eval(const std::vector<double>& c, const X& x) {
    X acc(0);
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

// ---------------------------------------------------------------------------
// Laurent expansion at infinity

namespace detail {

/// Coefficients e_k of prod_j (1 - r_j t)^{-1/2}, k = 0..K.
inline std::vector<double> inverse_sqrt_series(const std::vector<double>& roots, int K) {
    std::vector<double> e(static_cast<std::size_t>(K + 1), 0.0);
    e[0] = 1.0;
    std::vector<double> f(e.size());
    for (double r : roots) {
        // (1 - r t)^{-1/2} = sum binom(2k,k)/4^k r^k t^k
        f[0] = 1.0;
        for (int k = 1; k <= K; ++k) f[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>(k - 1)] * r * (2.0 * k - 1) / (2.0 * k);
        std::vector<double> g(e.size(), 0.0);
        for (int i = 0; i <= K; ++i)
            for (int j = 0; i + j <= K; ++j) g[static_cast<std::size_t>(i + j)] += e[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(j)];
        e = std::move(g);
    }
    return e;
}

} // namespace detail

/// Expansion of G(x) = V_h'(x)/sqrt(sigma) (+ charge regularisation) at infinity.
struct InfinityExpansion {
    std::vector<double> M;         // polynomial part, lowest first
    std::vector<double> negative;  // negative[l-1] = coefficient of x^{-l}, l = 1..L
};

inline InfinityExpansion expand_at_infinity(const Potential& pot, const std::vector<double>& roots,
                                            const std::optional<LogCharge>& charge, int L) {
    const auto v = pot.derivative_coeffs();
    const int s = static_cast<int>(roots.size()) / 2;
    const int dv = static_cast<int>(v.size()) - 1;
    const int K = dv + L + 1;
    const auto e = detail::inverse_sqrt_series(roots, K);
    auto coef = [&](int j) {
        double c = 0.0;
        for (int m = 0; m <= dv; ++m) {
            const int k = m - s - j;
            if (k >= 0 && k <= K) c += v[static_cast<std::size_t>(m)] * e[static_cast<std::size_t>(k)];
        }
        if (charge && charge->h != 0.0) {
            const double h = charge->h, xi = charge->xi;
            for (int k = 0; k <= -1 - s - j; ++k) c -= h * std::pow(xi, k) * e[static_cast<std::size_t>(-1 - s - j - k)];
            if (j <= -1) c += h / sqrt_sigma(roots, cplx(xi, 0.0)).real() * std::pow(xi, -1 - j);
        }
        return c;
    };
    InfinityExpansion out;
    for (int j = 0; j <= dv - s; ++j) out.M.push_back(coef(j));
    if (out.M.empty()) out.M.push_back(0.0);
    for (int l = 1; l <= L; ++l) out.negative.push_back(coef(-l));
    return out;
}

// ---------------------------------------------------------------------------
// Evaluators on a solved measure

/// V_h'(x) including the optional point charge.
template <class X>
X vprime_h(const EquilibriumMeasure& m, const Potential& pot, const X& x) {
    X v = pot.derivative(x);
    if (m.charge) v -= m.charge->h / (x - m.charge->xi);
    return v;
}

/// M_h(x) = M(x) - h / ((x - xi) sqrt(sigma(xi))).
template <class X>
X moment_poly(const EquilibriumMeasure& m, const X& x) {
    X v = poly_eval(m.M, x);
    if (m.charge) v -= m.charge->h / ((x - m.charge->xi) * sqrt_sigma(m.roots(), cplx(m.charge->xi, 0.0)).real());
    return v;
}

/// Index (0-based) of the cut containing real x, or -1.
inline int cut_index(const EquilibriumMeasure& m, double x) {
    for (int k = 0; k < m.s(); ++k)
        if (m.cuts[static_cast<std::size_t>(k)].contains(x)) return k;
    return -1;
}

/// Normalised equilibrium density (integrates to 1); zero off the support.
inline double density(const EquilibriumMeasure& m, double x) {
    const int k = cut_index(m, x);
    if (k < 0) return 0.0;
    const double sign = ((m.s() - 1 - k) % 2 == 0) ? 1.0 : -1.0;
    return sign * moment_poly(m, x) * sigma_abs_sqrt(m.roots(), x) / (2.0 * pi * m.T);
}

/// Integral of the density over [x, b_k] for x inside cut k.
inline double mass_right_of(const EquilibriumMeasure& m, double x) {
    const int k = cut_index(m, x);
    if (k < 0) throw error("mass_right_of: point is not inside a cut");
    const Cut& c = m.cuts[static_cast<std::size_t>(k)];
    // theta parametrisation x = c0 - r cos(theta) absorbs both square-root ends
    const double c0 = 0.5 * (c.a + c.b), r = 0.5 * (c.b - c.a);
    const double th = std::acos(std::clamp((c0 - x) / r, -1.0, 1.0));
    auto g = [&](double t) { return density(m, c0 - r * std::cos(t)) * r * std::sin(t); };
    return integrate_adaptive(g, th, pi, 1e-14);
}

/// Integral of the density over cut k.
inline double cut_mass(const EquilibriumMeasure& m, int k) {
    const Cut& c = m.cuts.at(static_cast<std::size_t>(k));
    return integrate_sqrt_ends([&](double x) { return density(m, x); }, c.a, c.b, 1e-14);
}

inline double total_mass(const EquilibriumMeasure& m) {
    double s = 0.0;
    for (int k = 0; k < m.s(); ++k) s += cut_mass(m, k);
    return s;
}

inline void check_not_branch_point(const EquilibriumMeasure& m, cplx x) {
    for (double r : m.roots())
        if (std::abs(x - r) < 1e-12) throw numerical_error("point within 1e-12 of a branch point");
}

/// omega(x) = (V_h' - M_h sqrt(sigma)) / 2 off the cuts. For real x on a cut
/// use resolvent_boundary.
inline cplx resolvent(const EquilibriumMeasure& m, const Potential& pot, cplx x) {
    check_not_branch_point(m, x);
    const auto roots = m.roots();
    if (x.imag() == 0.0 && cut_index(m, x.real()) >= 0)
        throw error("resolvent: x lies on a cut; use resolvent_boundary with a side");
    double rmax = 0.0;
    for (double r : roots) rmax = std::max(rmax, std::abs(r));
    if (m.charge) rmax = std::max(rmax, std::abs(m.charge->xi));
    if (std::abs(x) > 8.0 * rmax && std::abs(x) > 1.0) {
        // cancellation-free tail: omega = sqrt(sigma)/2 * sum_{l>s} c_l x^{-l}
        const int s = m.s();
        const int L = s + 40;
        const auto ex = expand_at_infinity(pot, roots, m.charge, L);
        cplx acc(0.0), xinv = 1.0 / x;
        for (int l = L; l > s; --l) acc = (acc + ex.negative[static_cast<std::size_t>(l - 1)]) * xinv;
        for (int l = 0; l < s; ++l) acc *= xinv;
        return 0.5 * sqrt_sigma(roots, x) * acc;
    }
    return 0.5 * (vprime_h(m, pot, x) - moment_poly(m, x) * sqrt_sigma(roots, x));
}

inline cplx resolvent_boundary(const EquilibriumMeasure& m, const Potential& pot, double x, int side) {
    check_not_branch_point(m, cplx(x, 0.0));
    return 0.5 * (vprime_h(m, pot, cplx(x, 0.0)) - moment_poly(m, cplx(x, 0.0)) * sqrt_sigma_boundary(m.roots(), x, side));
}

/// |V'(x) - omega(x+i0) - omega(x-i0)| with omega_+ + omega_- evaluated as the
/// principal-value Stieltjes transform 2T PV int rho(t)/(x-t) dt.
inline double saddle_residual(const EquilibriumMeasure& m, const Potential& pot, double x) {
    const int kx = cut_index(m, x);
    if (kx < 0) throw error("saddle_residual: x must lie strictly inside a cut");
    double pv = 0.0;
    for (int k = 0; k < m.s(); ++k) {
        const Cut& c = m.cuts[static_cast<std::size_t>(k)];
        const double c0 = 0.5 * (c.a + c.b), r = 0.5 * (c.b - c.a);
        auto at = [&](double t) { return c0 - r * std::cos(t); };
        if (k != kx) {
            pv += integrate_adaptive([&](double t) { return density(m, at(t)) / (x - at(t)) * r * std::sin(t); }, 0.0, pi, 1e-14);
            continue;
        }
        const double rx = density(m, x);
        const double th = std::acos(std::clamp((c0 - x) / r, -1.0, 1.0));
        auto g = [&](double t) {
            const double u = at(t);
            if (u == x) return 0.0;
            return (density(m, u) - rx) / (x - u) * r * std::sin(t);
        };
        pv += integrate_adaptive(g, 0.0, th, 1e-14) + integrate_adaptive(g, th, pi, 1e-14);
        // the subtracted constant rx times the principal value of 1/(x-t) over the cut
        pv += rx * std::log((x - c.a) / (c.b - x));
    }
    const double vp = vprime_h(m, pot, cplx(x, 0.0)).real();
    return std::abs(vp - 2.0 * m.T * pv);
}

/// Effective potential V(xi) - 2T int rho(t) ln(xi - t) dt on the physical
/// sheet, normalised so that V_eff = V - 2T ln xi + o(1) at infinity. For real
/// xi the logarithm is taken from the upper half plane.
inline cplx effective_potential_direct(const EquilibriumMeasure& m, const Potential& pot, cplx xi) {
    if (m.charge) throw error("effective_potential: not available with a point charge");
    cplx acc(0.0);
    const bool real_axis = xi.imag() == 0.0;
    auto lg = [&](double t) -> cplx {
        if (real_axis) {
            const double d = xi.real() - t;
            if (d == 0.0) return cplx(0.0);  // measure-zero point; density vanishes or is integrable there
            return d > 0 ? cplx(std::log(d), 0.0) : cplx(std::log(-d), pi);
        }
        return std::log(xi - t);
    };
    for (const Cut& c : m.cuts) {
        const double c0 = 0.5 * (c.a + c.b), r = 0.5 * (c.b - c.a);
        auto g = [&](double t) -> cplx {
            const double u = c0 - r * std::cos(t);
            return density(m, u) * lg(u) * (r * std::sin(t));
        };
        if (real_axis && c.contains(xi.real())) {
            const double th = std::acos(std::clamp((c0 - xi.real()) / r, -1.0, 1.0));
            acc += integrate_adaptive(g, 0.0, th, 1e-14) + integrate_adaptive(g, th, pi, 1e-14);
        } else {
            acc += integrate_adaptive(g, 0.0, pi, 1e-14);
        }
    }
    return pot.value(xi) - 2.0 * m.T * acc;
}

/// Integral of M sqrt(sigma) (upper boundary value) from b_s to real xi.
inline cplx veff_increment(const EquilibriumMeasure& m, double xi) {
    const auto roots = m.roots();
    auto f = [&](double x) { return moment_poly(m, x) * sqrt_sigma_boundary(roots, x, +1); };
    const double b = roots.back();
    if (xi >= b) {
        const double L = std::sqrt(xi - b);
        return integrate_adaptive([&](double t) { return f(b + t * t) * (2.0 * t); }, 0.0, L, 1e-13);
    }
    cplx acc(0.0);
    std::size_t k = roots.size() - 1;
    while (k > 0 && roots[k - 1] >= xi) {
        acc -= integrate_sqrt_ends(f, roots[k - 1], roots[k]);
        --k;
    }
    const double r = roots[k];
    if (xi < r) {
        const double L = std::sqrt(r - xi);
        acc -= integrate_adaptive([&](double t) { return f(r - t * t) * (2.0 * t); }, 0.0, L, 1e-13);
    }
    return acc;
}

/// Real xi: V_eff(b_s) plus the integral of V_eff' = M sqrt(sigma); elsewhere
/// the logarithmic potential is integrated directly.
inline cplx effective_potential(const EquilibriumMeasure& m, const Potential& pot, cplx xi) {
    if (m.charge) throw error("effective_potential: not available with a point charge");
    if (xi.imag() != 0.0 || !m.veff_right) return effective_potential_direct(m, pot, xi);
    return *m.veff_right + veff_increment(m, xi.real());
}

inline double effective_potential_at_right(const EquilibriumMeasure& m, const Potential& pot) {
    if (m.veff_right) return *m.veff_right;
    return effective_potential_direct(m, pot, cplx(m.right(), 0.0)).real();
}

/// Effective potential anchored at the rightmost branch point: int_{b_s}^{xi} M sqrt(sigma) dx.
inline cplx effective_potential_b(const EquilibriumMeasure& m, const Potential& pot, cplx xi) {
    return effective_potential(m, pot, xi) - effective_potential_at_right(m, pot);
}

/// Default edge-exclusion band 2 N^{-2/3} times the narrowest cut width.
inline double default_edge_delta(const EquilibriumMeasure& m, int N) {
    double w = m.cuts.front().width();
    for (const auto& c : m.cuts) w = std::min(w, c.width());
    return 2.0 * std::pow(static_cast<double>(N), -2.0 / 3.0) * w;
}

inline RegimeTag classify_regime(const EquilibriumMeasure& m, cplx xi, double delta) {
    for (double r : m.roots())
        if (std::abs(xi - r) < delta) return {Regime::excluded_edge, -1};
    if (std::abs(xi.imag()) <= 1e-14 * (1.0 + std::abs(xi))) {
        const int k = cut_index(m, xi.real());
        if (k >= 0) return {Regime::on_cut, k};
    }
    return {Regime::outside, -1};
}

// ---------------------------------------------------------------------------
// Solvers

struct SolveOptions {
    std::optional<std::vector<Cut>> guess;
    std::optional<LogCharge> charge;
    double tol = 1e-13;
    int max_iter = 100;
    bool check_density = true;
};

namespace detail {

inline std::vector<Cut> cuts_from_vector(const std::vector<double>& x) {
    std::vector<Cut> c;
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) c.push_back({x[i], x[i + 1]});
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!(c[i].b > c[i].a)) throw numerical_error("degenerate cut");
        if (i + 1 < c.size() && !(c[i + 1].a > c[i].b)) throw numerical_error("cut merging");
    }
    return c;
}

inline EquilibriumMeasure assemble(const Potential& pot, const std::vector<Cut>& cuts, double T,
                                   const std::vector<double>& fillings, const std::optional<LogCharge>& charge) {
    EquilibriumMeasure m;
    m.cuts = cuts;
    m.T = T;
    m.fillings = fillings;
    m.charge = charge;
    m.M = expand_at_infinity(pot, m.roots(), charge, 1).M;
    return m;
}

/// Residual of the endpoint equations: s+1 conditions at infinity followed by
/// s-1 filling conditions.
inline std::vector<double> endpoint_residual(const Potential& pot, double T, const std::vector<double>& fillings,
                                             const std::optional<LogCharge>& charge, const std::vector<double>& x) {
    const auto cuts = cuts_from_vector(x);
    const int s = static_cast<int>(cuts.size());
    if (charge)
        for (const auto& c : cuts)
            if (charge->xi >= c.a && charge->xi <= c.b) throw numerical_error("charge inside a cut");
    EquilibriumMeasure m;
    m.cuts = cuts;
    m.T = T;
    m.charge = charge;
    const auto ex = expand_at_infinity(pot, m.roots(), charge, s + 1);
    m.M = ex.M;
    std::vector<double> r;
    for (int l = 1; l <= s; ++l) r.push_back(ex.negative[static_cast<std::size_t>(l - 1)]);
    r.push_back(ex.negative[static_cast<std::size_t>(s)] - 2.0 * T);
    for (int k = 0; k + 1 < s; ++k) r.push_back(T * cut_mass(m, k) - fillings[static_cast<std::size_t>(k)]);
    return r;
}

/// Hull of the sublevel set {V <= min V + 2T}: a crude one-cut starting point.
inline Cut sublevel_hull(const Potential& pot, double T, double level_factor = 2.0) {
    const auto [xmin, vmin] = pot.global_minimum();
    double R = pot.root_bound() + std::abs(xmin);
    while (pot.value(R) <= vmin + level_factor * T || pot.value(-R) <= vmin + level_factor * T) R *= 1.5;
    const int n = 20000;
    double lo = xmin, hi = xmin;
    for (int i = 0; i <= n; ++i) {
        const double x = -R + 2.0 * R * i / n;
        if (pot.value(x) <= vmin + level_factor * T) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    if (hi - lo < 1e-6) {
        lo -= 0.5;
        hi += 0.5;
    }
    return {lo, hi};
}

inline std::string describe_residual(const std::vector<double>& r) {
    std::ostringstream os;
    os.precision(3);
    os << "[";
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? ", " : "") << r[i];
    os << "]";
    return os.str();
}

} // namespace detail

/// Point of most negative density on the support (x, rho) when the density
/// changes sign; nullopt otherwise.
inline std::optional<double> negative_density_point(const EquilibriumMeasure& m, int samples = 400) {
    double worst = 0.0;
    std::optional<double> where;
    for (int k = 0; k < m.s(); ++k) {
        const Cut& c = m.cuts[static_cast<std::size_t>(k)];
        const double sign = ((m.s() - 1 - k) % 2 == 0) ? 1.0 : -1.0;
        double scale = 0.0;
        for (int i = 1; i < samples; ++i) scale = std::max(scale, std::abs(moment_poly(m, c.a + c.width() * i / samples)));
        for (int i = 1; i < samples; ++i) {
            const double x = c.a + c.width() * i / samples;
            const double v = sign * moment_poly(m, x);
            if (v < -1e-9 * scale && v < worst) {
                worst = v;
                where = x;
            }
        }
    }
    return where;
}

/// Solves for s cuts with prescribed fillings (s-1 independent entries used).
inline EquilibriumMeasure solve_cuts(const Potential& pot, double T, int s, std::vector<double> fillings,
                                     const SolveOptions& opt = {}) {
    if (!(T > 0)) throw error("T must be positive");
    if (s < 1) throw error("number of cuts must be >= 1");
    if (s == 1) fillings = {T};
    if (static_cast<int>(fillings.size()) != s) throw error("fillings must have s entries");
    double fsum = 0.0;
    for (double f : fillings) {
        if (!(f > 0)) throw error("fillings must be positive");
        fsum += f;
    }
    if (std::abs(fsum - T) > 1e-10 * T) throw error("fillings must sum to T");

    std::vector<std::vector<Cut>> starts;
    if (opt.guess) {
        if (static_cast<int>(opt.guess->size()) != s) throw error("cut guess has the wrong number of intervals");
        starts.push_back(*opt.guess);
    } else if (s == 1) {
        for (double lf : {2.0, 1.0, 4.0, 0.5, 8.0}) starts.push_back({detail::sublevel_hull(pot, T, lf)});
    } else {
        // positive-density pieces of the one-cut attempt, then sublevel components
        try {
            SolveOptions o1;
            o1.check_density = false;
            const auto one = solve_cuts(pot, T, 1, {T}, o1);
            const Cut& c = one.cuts[0];
            std::vector<Cut> pieces;
            const int n = 4000;
            bool in = false;
            double start = 0.0;
            for (int i = 1; i < n; ++i) {
                const double x = c.a + c.width() * i / n;
                const bool pos = poly_eval(one.M, x) > 0;
                if (pos && !in) { start = x; in = true; }
                if ((!pos || i == n - 1) && in) {
                    pieces.push_back({start, x});
                    in = false;
                }
            }
            if (static_cast<int>(pieces.size()) == s) {
                for (auto& p : pieces) {
                    const double w = p.width();
                    p.a += 0.1 * w;
                    p.b -= 0.1 * w;
                }
                starts.push_back(pieces);
            }
        } catch (const error&) {
        }
        const auto [xmin, vmin] = pot.global_minimum();
        for (double level : {0.5, 1.0, 2.0, 0.25, 4.0}) {
            const Cut hull = detail::sublevel_hull(pot, T, level);
            std::vector<Cut> comps;
            const int n = 20000;
            bool in = false;
            double start = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double x = hull.a + hull.width() * i / n;
                const bool below = pot.value(x) <= vmin + level * T;
                if (below && !in) { start = x; in = true; }
                if ((!below || i == n) && in) {
                    if (x - start > 1e-6) comps.push_back({start, x});
                    in = false;
                }
            }
            if (static_cast<int>(comps.size()) == s) starts.push_back(comps);
        }
        if (starts.empty()) throw model_mismatch("no starting configuration with " + std::to_string(s) + " cuts; supply cuts_hint intervals");
    }

    auto residual = [&](const std::vector<double>& x) { return detail::endpoint_residual(pot, T, fillings, opt.charge, x); };
    NewtonResult best;
    double best_norm = std::numeric_limits<double>::infinity();
    for (const auto& st : starts) {
        std::vector<double> x0;
        for (const auto& c : st) {
            x0.push_back(c.a);
            x0.push_back(c.b);
        }
        auto res = newton_solve(residual, x0, opt.tol, opt.max_iter, 1e-7);
        double nr = 0.0;
        for (double e : res.residual) nr += e * e;
        nr = std::sqrt(nr);
        if (res.converged) {
            best = std::move(res);
            best_norm = nr;
            break;
        }
        if (nr < best_norm) {
            best_norm = nr;
            best = std::move(res);
        }
    }
    if (!best.converged)
        throw numerical_error("endpoint Newton iteration failed; residuals " + detail::describe_residual(best.residual));
    auto m = detail::assemble(pot, detail::cuts_from_vector(best.x), T, fillings, opt.charge);
    if (opt.check_density) {
        if (auto x = negative_density_point(m)) {
            std::ostringstream os;
            os.precision(3);
            os << "negative density at x≈" << *x << " (the " << s << "-cut ansatz is invalid; try a different number of cuts)";
            throw model_mismatch(os.str());
        }
    }
    if (!m.charge) m.veff_right = effective_potential_direct(m, pot, cplx(m.right(), 0.0)).real();
    return m;
}

inline EquilibriumMeasure solve_one_cut(const Potential& pot, double T = 1.0, const SolveOptions& opt = {}) {
    return solve_cuts(pot, T, 1, {T}, opt);
}

inline EquilibriumMeasure solve_multi_cut(const Potential& pot, double T, int s, const std::vector<double>& fillings,
                                          const SolveOptions& opt = {}) {
    if (s < 2) throw error("solve_multi_cut needs s >= 2");
    return solve_cuts(pot, T, s, fillings, opt);
}

/// Gradient of F with respect to the independent fillings eps_1..eps_{s-1}:
/// dF/d eps_i = -int_{b_i}^{a_s} M sqrt(sigma) dx along the gaps (the
/// contributions of intermediate cuts are purely imaginary and cancel between
/// the two sheets of the B-cycle).
inline std::vector<double> filling_gradient(const EquilibriumMeasure& m) {
    const int s = m.s();
    const auto roots = m.roots();
    std::vector<double> gap(static_cast<std::size_t>(std::max(0, s - 1)));
    for (int k = 0; k + 1 < s; ++k) {
        const double lo = m.cuts[static_cast<std::size_t>(k)].b, hi = m.cuts[static_cast<std::size_t>(k + 1)].a;
        gap[static_cast<std::size_t>(k)] = integrate_sqrt_ends(
            [&](double x) { return (poly_eval(m.M, x) * sqrt_sigma_boundary(roots, x, 1)).real(); }, lo, hi, 1e-14);
    }
    std::vector<double> g(gap.size(), 0.0);
    for (int i = 0; i + 1 < s; ++i)
        for (int k = i; k + 1 < s; ++k) g[static_cast<std::size_t>(i)] -= gap[static_cast<std::size_t>(k)];
    return g;
}

} // namespace opasym
