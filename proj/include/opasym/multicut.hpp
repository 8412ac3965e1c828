#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equilibrium.hpp"
#include "errors.hpp"
#include "genus0.hpp"
#include "riemann.hpp"

namespace opasym {

/// Everything the multi-cut formula needs, built once per (potential, fillings).
struct MultiCutModel {
    Potential pot;
    EquilibriumMeasure meas;
    SpectralCurve curve;
    PeriodData pd;
    ThetaContext ctx;
    GenusGData geo;
    Eigen::VectorXd eps;   // eps_1..eps_g
    Eigen::VectorXd zeta;  // length g
    double veff_right = 0.0;

    static MultiCutModel build(const Potential& pot, const EquilibriumMeasure& meas, const std::vector<double>& zeta = {}) {
        if (meas.s() < 2) throw error("multi-cut model needs s >= 2");
        auto curve = SpectralCurve::from_measure(meas);
        auto pd = compute_periods(curve);
        ThetaContext ctx(pd.tau);
        choose_characteristic(ctx, curve, pd);
        auto geo = genus_g_data(ctx, curve, pd);
        const int g = curve.genus();
        Eigen::VectorXd eps(g), z = Eigen::VectorXd::Zero(g);
        for (int i = 0; i < g; ++i) eps(i) = meas.fillings[static_cast<std::size_t>(i)];
        if (!zeta.empty()) {
            if (static_cast<int>(zeta.size()) != g) throw error("zeta must have s-1 entries");
            for (int i = 0; i < g; ++i) z(i) = zeta[static_cast<std::size_t>(i)];
        }
        const double vr = effective_potential_at_right(meas, pot);
        return MultiCutModel{pot, meas, std::move(curve), std::move(pd), std::move(ctx), std::move(geo), eps, z, vr};
    }
};

namespace detail {

/// theta(v - N tau eps) e^{-2 i pi N eps.w} is carried by the theta function
/// with real characteristic d = -N eps (mod 1), which keeps every factor O(1).
inline Eigen::VectorXd theta_shift(const MultiCutModel& m, int N) {
    Eigen::VectorXd d(m.eps.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double v = -static_cast<double>(N) * m.eps(i);
        d(i) = v - std::floor(v);
    }
    return d;
}

/// N zeta + (n - N)(u(inf-) - u(inf+)); the orientation of the shift is the
/// one fixed by the mixed derivative d^2 F / d eps dT.
inline cvec theta_argument(const MultiCutModel& m, int n, int N) {
    return static_cast<double>(N) * m.zeta.cast<cplx>() + static_cast<double>(n - N) * (m.geo.u_inf_minus - m.geo.u_inf_plus);
}

struct SaddleTerm {
    cplx log_value;  // log of the monic contribution
    LambdaH lh;
};

inline SaddleTerm multicut_term(const MultiCutModel& m, int n, int N, double xi, int sheet, const cvec& u_phys) {
    const auto p = SurfacePoint::at(cplx(xi, 0.0), sheet);
    // on a cut the second-sheet point is the lower boundary value, whose
    // Abel image is -conj(u) (du is i times a real differential); -u differs
    // from it by a lattice vector on every cut but the last
    const bool on_cut = cut_index(m.meas, xi) >= 0;
    const cvec up = sheet > 0 ? u_phys : on_cut ? cvec(-u_phys.conjugate()) : cvec(-u_phys);
    const auto lh = lambda_h_genusg(m.ctx, m.curve, m.pd, m.geo, p, &up);
    const cplx veff_phys = effective_potential(m.meas, m.pot, cplx(xi, 0.0));
    const cplx veff = sheet > 0 ? veff_phys : 2.0 * m.veff_right - veff_phys;

    const Eigen::VectorXd d = theta_shift(m, N);
    const cvec c = theta_argument(m, n, N);
    const cvec w = up - m.geo.u_inf_plus;
    const cplx log_den = m.ctx.log_theta_shifted(d, c);
    if (!(std::exp(log_den.real()) > 1e-12))
        throw numerical_error("theta divisor hit at argument (" + std::to_string(c(0).real()) + ", " + std::to_string(c(0).imag()) + ")");
    const cplx log_theta_ratio = m.ctx.log_theta_shifted(d, c + w) - log_den;

    SaddleTerm t;
    t.lh = lh;
    t.log_value = 0.5 * std::log(lh.H) + static_cast<double>(n - N) * std::log(lh.Lambda) -
                  0.5 * static_cast<double>(N) * (veff - m.pot.value(xi)) + log_theta_ratio;
    return t;
}

} // namespace detail

/// Model norms h_n = gamma^{2(n-N)+1} e^{-N V_eff(b)} Theta(c_{n+1}) / (C^2 Theta(c_n)).
inline double log_h_multicut(const MultiCutModel& m, int n, int N, const BulkCalibration& cal = frozen_calibration()) {
    const auto d = detail::theta_shift(m, N);
    const cplx r = m.ctx.log_theta_shifted(d, detail::theta_argument(m, n + 1, N)) -
                   m.ctx.log_theta_shifted(d, detail::theta_argument(m, n, N));
    return -2.0 * std::log(cal.C) + (2.0 * (n - N) + 1.0) * std::log(std::abs(m.geo.gamma)) - N * m.veff_right + r.real();
}

/// Predicted recurrence coefficient b_n = h_n / h_{n-1}.
inline double b_multicut(const MultiCutModel& m, int n, int N) {
    return std::exp(log_h_multicut(m, n, N) - log_h_multicut(m, n - 1, N));
}

/// Multi-cut prediction. Outside the cuts only the physical-sheet saddle
/// contributes; on a cut the two boundary values are summed.
inline AsymptoticPrediction asym_multicut(const MultiCutModel& m, int n, int N, double xi, double delta = -1.0,
                                          const BulkCalibration& cal = frozen_calibration()) {
    if (delta <= 0) delta = default_edge_delta(m.meas, N);
    AsymptoticPrediction out;
    out.n = n;
    out.N = N;
    out.xi = xi;
    out.regime = classify_regime(m.meas, xi, delta);
    if (out.regime.kind == Regime::excluded_edge) {
        out.psi_pred = out.p_pred = out.log_abs_p_pred = out.envelope = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const cvec u = abel_map(m.curve, m.pd, SurfacePoint::at(cplx(xi, 0.0)));
    const auto t1 = detail::multicut_term(m, n, N, xi, 1, u);
    cplx sum;
    double env_log;
    if (out.regime.kind == Regime::outside) {
        sum = std::exp(t1.log_value);
        env_log = t1.log_value.real();
    } else {
        const auto t2 = detail::multicut_term(m, n, N, xi, -1, u);
        sum = std::exp(t1.log_value) + std::exp(t2.log_value);
        env_log = std::log(std::exp(t1.log_value.real()) + std::exp(t2.log_value.real()));
    }
    out.ingredients = {cplx(0.0), t1.lh.Lambda, t1.lh.H, effective_potential(m.meas, m.pot, cplx(xi, 0.0)) - m.veff_right};
    out.p_pred = sum.real();
    out.log_abs_p_pred = std::log(std::abs(sum.real()));
    const double log_scale = 0.5 * log_h_multicut(m, n, N, cal) + 0.5 * N * m.pot.value(xi);
    out.psi_pred = out.p_pred * std::exp(-log_scale);
    out.envelope = std::exp(env_log - log_scale);
    return out;
}

/// Sum of the two terms before taking the real part; the imaginary part
/// measures the reality defect of the prediction.
inline cplx multicut_monic_complex(const MultiCutModel& m, int n, int N, double xi, bool both_sheets) {
    const cvec u = abel_map(m.curve, m.pd, SurfacePoint::at(cplx(xi, 0.0)));
    cplx sum = std::exp(detail::multicut_term(m, n, N, xi, 1, u).log_value);
    if (both_sheets) sum += std::exp(detail::multicut_term(m, n, N, xi, -1, u).log_value);
    return sum;
}

} // namespace opasym
