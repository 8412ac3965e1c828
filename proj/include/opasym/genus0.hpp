#pragma once

#include <cmath>
#include <complex>
#include <optional>

#include "equilibrium.hpp"
#include "errors.hpp"
#include "exact_ortho.hpp"
#include "numeric.hpp"
#include "potential.hpp"

namespace opasym {

/// x(p) = center + gamma (p + 1/p); |p| > 1 is the physical sheet.
struct JoukowskiMap {
    double a = 0.0;
    double b = 0.0;
    double gamma = 0.0;
    double center = 0.0;

    static JoukowskiMap from_cut(double a, double b) { return {a, b, (b - a) / 4.0, (a + b) / 2.0}; }
    static JoukowskiMap from_measure(const EquilibriumMeasure& m) {
        if (m.s() != 1) throw error("Joukowski map needs a one-cut measure");
        return from_cut(m.cuts[0].a, m.cuts[0].b);
    }
    cplx x_of(cplx p) const { return center + gamma * (p + 1.0 / p); }
    cplx dx_dp(cplx p) const { return gamma * (1.0 - 1.0 / (p * p)); }
};

struct SheetPoint {
    cplx p;
    bool bulk = false;  // real xi strictly inside the cut: p = e^{i phi}
    double phi = 0.0;
};

inline SheetPoint map_to_p(const JoukowskiMap& m, cplx xi) {
    const cplx w = (xi - m.center) / (2.0 * m.gamma);
    if (xi.imag() == 0.0 && std::abs(w.real()) < 1.0) {
        const double phi = std::acos(w.real());
        return {std::polar(1.0, phi), true, phi};
    }
    // p = w + sqrt(w^2 - 1) with the root of modulus >= 1
    cplx root = std::sqrt(w - 1.0) * std::sqrt(w + 1.0);
    cplx p = w + root;
    if (std::abs(p) < 1.0) p = w - root;
    return {p, false, 0.0};
}

inline LambdaH lambda_h_genus0(const JoukowskiMap& m, cplx p) {
    if (std::abs(p * p - 1.0) < 1e-14) throw numerical_error("Lambda/H undefined at a branch point (p = ±1)");
    if (p == 0.0) throw numerical_error("Lambda/H undefined at p = 0");
    return {m.gamma * p, p * p / (p * p - 1.0)};
}

struct Ingredients {
    cplx p;
    cplx Lambda;
    cplx H;
    cplx veff;  // V_eff anchored at the right endpoint
};

struct AsymptoticPrediction {
    int n = 0;
    int N = 0;
    double xi = 0.0;
    RegimeTag regime;
    double psi_pred = 0.0;     // orthonormal wave function
    double p_pred = 0.0;       // monic polynomial
    double log_abs_p_pred = 0.0;
    double envelope = 0.0;     // |psi_pred| outside, oscillation amplitude in the bulk
    std::optional<double> phase;
    Ingredients ingredients;
};

/// Bulk constants: psi_n ~ C gamma^{-1/2} ... cos(phase + alpha). The values are
/// the ones returned by calibrate_bulk_constants on the Gaussian at N = 40,
/// rounded to their closed forms.
struct BulkCalibration {
    double C = 0.39894228040143267794;  // 1/sqrt(2 pi)
    double alpha = 0.0;
};

inline const BulkCalibration& frozen_calibration() {
    static const BulkCalibration c{};
    return c;
}

/// Model norms h_n = 2 pi gamma^{2(n-N)+1} e^{-N V_eff(b)} with V_eff normalised at infinity.
inline double log_h_model(double gamma, double veff_inf_at_b, int n, int N) {
    return std::log(2.0 * pi) + (2.0 * (n - N) + 1.0) * std::log(gamma) - N * veff_inf_at_b;
}

/// Prediction outside the cut: psi_n = C gamma^{-1/2} sqrt(H) p^{n-N} e^{-(N/2) V_eff^b(xi)}.
inline AsymptoticPrediction asym_outside(const EquilibriumMeasure& meas, const Potential& pot, const JoukowskiMap& map,
                                         int n, int N, double xi, double delta = -1.0,
                                         const BulkCalibration& cal = frozen_calibration()) {
    if (delta <= 0) delta = default_edge_delta(meas, N);
    const auto tag = classify_regime(meas, xi, delta);
    if (tag.kind != Regime::outside) throw model_mismatch(std::string("asym_outside: regime is ") + regime_name(tag.kind));
    const auto sp = map_to_p(map, xi);
    const auto lh = lambda_h_genus0(map, sp.p);
    const cplx veff_inf = effective_potential(meas, pot, xi);
    const cplx veff_b = veff_inf - effective_potential_at_right(meas, pot);
    AsymptoticPrediction out;
    out.n = n;
    out.N = N;
    out.xi = xi;
    out.regime = tag;
    out.ingredients = {sp.p, lh.Lambda, lh.H, veff_b};
    const int k = n - N;
    // logarithms keep large N finite; the complex phases carry signs
    const cplx log_psi = std::log(cal.C) - 0.5 * std::log(map.gamma) + 0.5 * std::log(lh.H) + static_cast<double>(k) * std::log(sp.p) -
                         0.5 * N * veff_b;
    const cplx log_p = 0.5 * std::log(lh.H) + static_cast<double>(k) * std::log(lh.Lambda) - 0.5 * N * (veff_inf - pot.value(xi));
    out.psi_pred = std::exp(log_psi).real();
    out.envelope = std::exp(log_psi.real());
    out.p_pred = std::exp(log_p).real();
    out.log_abs_p_pred = log_p.real();
    return out;
}

/// Oscillatory prediction inside the cut:
///   psi_n = C gamma^{-1/2} (2 sin phi)^{-1/2} 2 cos(N pi T int_xi^b rho + (n-N+1/2) phi - pi/4 + alpha).
inline AsymptoticPrediction asym_bulk(const EquilibriumMeasure& meas, const Potential& pot, const JoukowskiMap& map, int n,
                                      int N, double xi, double delta = -1.0,
                                      const BulkCalibration& cal = frozen_calibration()) {
    if (delta <= 0) delta = default_edge_delta(meas, N);
    const auto tag = classify_regime(meas, xi, delta);
    if (tag.kind == Regime::excluded_edge) throw model_mismatch("asym_bulk: point lies inside the edge-exclusion band");
    if (tag.kind != Regime::on_cut) throw model_mismatch("asym_bulk: point is not on the cut");
    const auto sp = map_to_p(map, xi);
    const double mass = mass_right_of(meas, xi);
    const double phase = N * pi * meas.T * mass + (n - N + 0.5) * sp.phi - pi / 4 + cal.alpha;
    const double env = 2.0 * cal.C / std::sqrt(map.gamma * 2.0 * std::sin(sp.phi));
    AsymptoticPrediction out;
    out.n = n;
    out.N = N;
    out.xi = xi;
    out.regime = tag;
    out.phase = phase;
    out.envelope = env;
    out.psi_pred = env * std::cos(phase);
    const auto lh = lambda_h_genus0(map, sp.p);
    const cplx veff_b(0.0, -2.0 * pi * meas.T * mass);  // upper boundary value
    out.ingredients = {sp.p, lh.Lambda, lh.H, veff_b};
    // monic value through the model norms
    const double vb = effective_potential_at_right(meas, pot);
    const double log_scale = 0.5 * log_h_model(map.gamma, vb, n, N) + 0.5 * N * pot.value(xi);
    out.p_pred = out.psi_pred * std::exp(log_scale);
    out.log_abs_p_pred = std::log(std::abs(out.psi_pred)) + log_scale;
    return out;
}

/// Dispatches on the regime of xi.
inline AsymptoticPrediction asym_genus0(const EquilibriumMeasure& meas, const Potential& pot, const JoukowskiMap& map, int n,
                                        int N, double xi, double delta = -1.0,
                                        const BulkCalibration& cal = frozen_calibration()) {
    if (delta <= 0) delta = default_edge_delta(meas, N);
    const auto tag = classify_regime(meas, xi, delta);
    if (tag.kind == Regime::excluded_edge) {
        AsymptoticPrediction out;
        out.n = n;
        out.N = N;
        out.xi = xi;
        out.regime = tag;
        out.psi_pred = std::nan("");
        out.p_pred = std::nan("");
        out.log_abs_p_pred = std::nan("");
        out.envelope = std::nan("");
        return out;
    }
    return tag.kind == Regime::outside ? asym_outside(meas, pot, map, n, N, xi, delta, cal)
                                       : asym_bulk(meas, pot, map, n, N, xi, delta, cal);
}

/// Fits (C, alpha) of the bulk formula to the exact Gaussian psi_N at two
/// mid-cut points.
inline BulkCalibration calibrate_bulk_constants(int N = 40, double x1 = 0.3, double x2 = 0.7) {
    const Potential gauss({0.0, 0.0, 0.5});
    const auto meas = solve_one_cut(gauss);
    const auto map = JoukowskiMap::from_measure(meas);
    const auto table = exact_table<mp_real>(gauss, N, N, std::max(30, 2 * N));
    BulkCalibration unit;
    unit.C = 1.0;
    unit.alpha = 0.0;
    double rows[2][2], rhs[2];
    const double xs[2] = {x1, x2};
    for (int i = 0; i < 2; ++i) {
        const auto pr = asym_bulk(meas, gauss, map, N, N, xs[i], -1.0, unit);
        const double psi = eval_wave(table, gauss, N, xs[i]).psi;
        // psi / env = C cos(theta + alpha) = u cos(theta) - v sin(theta)
        rows[i][0] = std::cos(*pr.phase);
        rows[i][1] = -std::sin(*pr.phase);
        rhs[i] = psi / pr.envelope;
    }
    const double det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0];
    if (std::abs(det) < 1e-12) throw numerical_error("calibration points are degenerate");
    const double u = (rhs[0] * rows[1][1] - rows[0][1] * rhs[1]) / det;
    const double v = (rows[0][0] * rhs[1] - rows[1][0] * rhs[0]) / det;
    BulkCalibration out;
    out.C = std::hypot(u, v);
    out.alpha = std::atan2(v, u);
    return out;
}

} // namespace opasym
