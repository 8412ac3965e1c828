#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "exact_ortho.hpp"

namespace opasym {

/// Zeros of p_n as eigenvalues of the truncated Jacobi matrix.
template <class Real>
std::vector<double> exact_zeros(const RecurrenceTable<Real>& t, int n) {
    if (n < 1 || n > t.n_max + 1) throw error("exact_zeros: index outside the recurrence table");
    PrecisionScope<Real> scope(t.digits);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        J(i, i) = to_double(t.a[static_cast<std::size_t>(i)]);
        if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = std::sqrt(to_double(t.b[static_cast<std::size_t>(i + 1)]));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

/// Sign changes of f on a uniform sampling of [lo, hi], refined by bisection.
inline std::vector<double> find_zeros(const std::function<double(double)>& f, double lo, double hi, int samples = 2000) {
    std::vector<double> z;
    double x0 = lo, f0 = f(lo);
    for (int i = 1; i <= samples; ++i) {
        const double x1 = lo + (hi - lo) * i / samples;
        const double f1 = f(x1);
        if (f0 == 0.0) {
            z.push_back(x0);
        } else if (f0 * f1 < 0.0) {
            double l = x0, r = x1, fl = f0;
            for (int it = 0; it < 60; ++it) {
                const double m = 0.5 * (l + r), fm = f(m);
                if (fm * fl <= 0.0) {
                    r = m;
                } else {
                    l = m;
                    fl = fm;
                }
            }
            z.push_back(0.5 * (l + r));
        }
        x0 = x1;
        f0 = f1;
    }
    return z;
}

inline std::vector<double> zeros_in(const std::vector<double>& zeros, double lo, double hi) {
    std::vector<double> out;
    for (double z : zeros)
        if (z >= lo && z <= hi) out.push_back(z);
    return out;
}

/// Largest distance from a predicted zero to the nearest exact zero, in units
/// of the local exact zero spacing.
inline double zero_location_error(const std::vector<double>& predicted, const std::vector<double>& exact) {
    if (exact.size() < 2) return predicted.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (double z : predicted) {
        const auto it = std::lower_bound(exact.begin(), exact.end(), z);
        std::size_t j = static_cast<std::size_t>(it - exact.begin());
        if (j == exact.size() || (j > 0 && std::abs(exact[j - 1] - z) < std::abs(exact[j] - z))) --j;
        const double left = j > 0 ? exact[j] - exact[j - 1] : exact[j + 1] - exact[j];
        const double right = j + 1 < exact.size() ? exact[j + 1] - exact[j] : left;
        worst = std::max(worst, std::abs(z - exact[j]) / std::min(left, right));
    }
    return worst;
}

/// Exact one-point density K_n(x,x)/n integrated over each of `bins` equal
/// bins of [lo, hi]; the table must use the weight e^{-n V} and reach n-1.
template <class Real>
std::vector<double> exact_bin_mass(const RecurrenceTable<Real>& t, const Potential& pot, int n, double lo, double hi, int bins,
                                   int nodes = 12) {
    if (n < 1 || n - 1 > t.n_max) throw error("exact_bin_mass: table does not reach n-1");
    PrecisionScope<Real> scope(t.digits);
    const auto& gl = gauss_legendre_cached(nodes);
    std::vector<double> out(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) {
        const double a = lo + (hi - lo) * k / bins, b = lo + (hi - lo) * (k + 1) / bins;
        const double c = 0.5 * (a + b), r = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const auto psi = eval_psi_all(t, pot, Real(c + r * gl.nodes[i]), n - 1);
            Real s(0);
            for (const auto& v : psi) s += v * v;
            acc += gl.weights[i] * to_double(s);
        }
        out[static_cast<std::size_t>(k)] = acc * r / n;
    }
    return out;
}

} // namespace opasym
