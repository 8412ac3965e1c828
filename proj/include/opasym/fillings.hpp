#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equilibrium.hpp"
#include "errors.hpp"
#include "riemann.hpp"

namespace opasym {

struct FillingOptimum {
    std::vector<double> fillings;  // eps*, all s entries
    std::vector<double> zeta;      // length s-1
    EquilibriumMeasure measure;
    int iterations = 0;
    double gradient_norm = 0.0;
};

struct FillingOptions {
    std::optional<std::vector<double>> start;
    double tol = 1e-11;
    int max_iter = 40;
};

/// zeta_i = -(1/2 pi i) dF/d eps_i. The gap-only B-cycles make dF/d eps real,
/// so zeta is purely imaginary away from eps* and zero at eps*.
inline std::vector<cplx> zeta_from_gradient(const std::vector<double>& g) {
    std::vector<cplx> z;
    for (double gi : g) z.push_back(-gi / cplx(0.0, 2.0 * pi));
    return z;
}

/// Newton on dF/d eps_i = -oint_{B_i} W dx with Hessian -2 pi i tau = 2 pi Im tau.
inline FillingOptimum optimize_fillings(const Potential& pot, double T, int s, const FillingOptions& opt = {},
                                        const SolveOptions& solve = {}) {
    if (s < 2) throw error("optimize_fillings needs s >= 2");
    const int g = s - 1;
    std::vector<double> eps = opt.start ? *opt.start : std::vector<double>(static_cast<std::size_t>(s), T / s);
    if (static_cast<int>(eps.size()) != s) throw error("start fillings must have s entries");

    FillingOptimum out;
    for (int it = 0; it <= opt.max_iter; ++it) {
        auto meas = solve_multi_cut(pot, T, s, eps, solve);
        const auto grad = filling_gradient(meas);
        Eigen::VectorXd gv(g);
        for (int i = 0; i < g; ++i) gv(i) = grad[static_cast<std::size_t>(i)];
        out.gradient_norm = gv.norm();
        out.iterations = it;
        if (out.gradient_norm <= opt.tol) {
            out.fillings = eps;
            out.measure = std::move(meas);
            for (const auto& z : zeta_from_gradient(grad)) {
                if (std::abs(z.imag()) > 1e-8) throw numerical_error("zeta not real at the optimum: Im = " + std::to_string(z.imag()));
                out.zeta.push_back(z.real());
            }
            return out;
        }
        const auto curve = SpectralCurve::from_measure(meas);
        const auto pd = compute_periods(curve);
        const cmat hess_c = cplx(0.0, -2.0 * pi) * pd.tau;
        if (hess_c.imag().cwiseAbs().maxCoeff() > 1e-8 * hess_c.real().cwiseAbs().maxCoeff())
            throw numerical_error("Hessian -2 pi i tau is not real (Re tau != 0)");
        const Eigen::MatrixXd hess = hess_c.real();
        Eigen::LLT<Eigen::MatrixXd> llt(hess);
        if (llt.info() != Eigen::Success) throw numerical_error("filling Hessian not positive definite (tau computation error)");
        Eigen::VectorXd step = -llt.solve(gv);
        // keep every filling positive
        double lam = 1.0;
        for (int tries = 0; tries < 60; ++tries) {
            double last = T;
            bool ok = true;
            for (int i = 0; i < g; ++i) {
                const double e = eps[static_cast<std::size_t>(i)] + lam * step(i);
                if (!(e > 0)) ok = false;
                last -= e;
            }
            if (ok && last > 0) break;
            lam *= 0.5;
        }
        double last = T;
        for (int i = 0; i < g; ++i) {
            eps[static_cast<std::size_t>(i)] += lam * step(i);
            last -= eps[static_cast<std::size_t>(i)];
        }
        eps[static_cast<std::size_t>(g)] = last;
    }
    throw numerical_error("optimize_fillings: Newton did not converge, |grad| = " + std::to_string(out.gradient_norm));
}

} // namespace opasym
