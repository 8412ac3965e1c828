#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <opasym/exact_ortho.hpp>

using namespace opasym;

namespace {

const Potential gaussian({0, 0, 0.5});
const Potential quartic_one_cut({0, 0, 0.5, 0, 0.25});
const Potential quartic_two_cut({0, 0, -2, 0, 0.25});

double rule_sum(const QuadratureRule<mp_real>& q, int power) {
    PrecisionScope<mp_real> scope(q.digits);
    mp_real s(0);
    for (std::size_t j = 0; j < q.size(); ++j) s += q.weights[j] * pow(q.nodes[j], power);
    return to_double(s);
}

// Trapezoid rule on [-L, L]^d for the Coulomb-gas partition function.
double trapezoid_partition(const Potential& pot, int N, int dim, double L, int m) {
    const double hstep = 2 * L / (m - 1);
    std::vector<double> x(static_cast<std::size_t>(m)), w(x.size());
    for (int i = 0; i < m; ++i) {
        x[static_cast<std::size_t>(i)] = -L + hstep * i;
        w[static_cast<std::size_t>(i)] = hstep * std::exp(-N * pot.value(x[static_cast<std::size_t>(i)]));
    }
    double total = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        double term = 1.0;
        for (int a = 0; a < dim; ++a) {
            term *= w[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
            for (int b = a + 1; b < dim; ++b) {
                const double d = x[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])] -
                                 x[static_cast<std::size_t>(idx[static_cast<std::size_t>(b)])];
                term *= d * d;
            }
        }
        total += term;
        int k = 0;
        while (k < dim && ++idx[static_cast<std::size_t>(k)] == m) idx[static_cast<std::size_t>(k++)] = 0;
        if (k == dim) break;
    }
    return total;
}

} // namespace

TEST(Quadrature, GaussianMoments) {
    const auto q = build_weight_quadrature<mp_real>(gaussian, 1, 8, 30);
    EXPECT_NEAR(rule_sum(q, 0), std::sqrt(2 * pi), 1e-15);
    EXPECT_NEAR(rule_sum(q, 1), 0.0, 1e-20);
    EXPECT_NEAR(rule_sum(q, 2), std::sqrt(2 * pi), 1e-15);
    EXPECT_NEAR(rule_sum(q, 4), 3 * std::sqrt(2 * pi), 1e-14);
    EXPECT_LE(q.achieved_error, q.target_error);
    for (std::size_t j = 1; j < q.size(); ++j) {
        ASSERT_GT(q.weights[j], 0);
        ASSERT_GT(q.nodes[j], q.nodes[j - 1]);
    }
}

TEST(Quadrature, QuarticAgainstAdaptiveIntegrator) {
    const auto q = build_weight_quadrature<mp_real>(Potential({0, 0, 0, 0, 0.25}), 1, 4, 30);
    const double adaptive = integrate_adaptive([](double x) { return std::exp(-x * x * x * x / 4); }, -12.0, 12.0, 1e-14);
    const double closed = std::sqrt(2.0) * std::tgamma(0.25) / 2;
    EXPECT_NEAR(rule_sum(q, 0), adaptive, 1e-12 * adaptive);
    EXPECT_NEAR(rule_sum(q, 0), closed, 1e-13);
}

TEST(Quadrature, NodeBudgetExceeded) {
    EXPECT_THROW(build_weight_quadrature<mp_real>(quartic_two_cut, 40, 80, 80, 100), numerical_error);
}

TEST(Recurrence, GaussianHermite) {
    const auto t = exact_table<mp_real>(gaussian, 1, 12, 30);
    for (int n = 0; n <= 12; ++n) EXPECT_NEAR(to_double(t.a[static_cast<std::size_t>(n)]), 0.0, 1e-22);
    for (int n = 1; n <= 12; ++n) EXPECT_NEAR(to_double(t.b[static_cast<std::size_t>(n)]), n, 1e-20 * n);
    EXPECT_NEAR(to_double(t.h[0]), std::sqrt(2 * pi), 1e-15);
    // h_n = h_0 prod b_k
    PrecisionScope<mp_real> scope(t.digits);
    mp_real prod = t.h[0];
    for (int n = 1; n <= 12; ++n) {
        prod *= t.b[static_cast<std::size_t>(n)];
        EXPECT_LT(to_double(abs(prod / t.h[static_cast<std::size_t>(n)] - 1)), 1e-25);
    }
}

TEST(Recurrence, GaussianScaledByN) {
    // weight e^{-N x^2/2}: b_n = n / N
    const auto t = exact_table<mp_real>(gaussian, 10, 20, 40);
    for (int n = 1; n <= 20; ++n) EXPECT_NEAR(to_double(t.b[static_cast<std::size_t>(n)]), n / 10.0, 1e-30);
}

TEST(Recurrence, TwoCutQuarticPositiveAndStable) {
    const auto t = exact_table<mp_real>(quartic_two_cut, 10, 40, 40);
    const auto ref = exact_table<mp_real>(quartic_two_cut, 10, 40, 70);
    for (int n = 1; n <= 40; ++n) {
        const auto k = static_cast<std::size_t>(n);
        EXPECT_GT(t.b[k], 0);
        EXPECT_NEAR(to_double(t.b[k]), to_double(ref.b[k]), 1e-28 * to_double(ref.b[k]));
        EXPECT_NEAR(to_double(t.a[k]), 0.0, 1e-28);
    }
    EXPECT_LE(t.max_offdiag, 1e-32);
}

TEST(Recurrence, OrthonormalityOnRefinedRule) {
    for (const Potential* pot : {&gaussian, &quartic_one_cut}) {
        const int N = 40, digits = 40;
        const auto t = exact_table<mp_real>(*pot, N, N, digits);
        const auto fine = build_weight_quadrature<mp_real>(*pot, N, 2 * N + 20, digits + 10);
        PrecisionScope<mp_real> scope(digits + 10);
        std::vector<std::vector<mp_real>> psi;
        for (std::size_t j = 0; j < fine.size(); ++j) {
            auto p = eval_monic_all(t, fine.nodes[j], N);
            for (std::size_t k = 0; k < p.size(); ++k) p[k] /= sqrt(t.h[k]);
            psi.push_back(std::move(p));
        }
        double worst = 0.0;
        for (int n = 0; n <= N; n += 3)
            for (int m = n; m <= N; m += 2) {
                mp_real s(0);
                for (std::size_t j = 0; j < fine.size(); ++j)
                    s += fine.weights[j] * psi[j][static_cast<std::size_t>(n)] * psi[j][static_cast<std::size_t>(m)];
                worst = std::max(worst, std::abs(to_double(s) - (n == m ? 1.0 : 0.0)));
            }
        EXPECT_LE(worst, 1e-20);
    }
}

TEST(Wave, Basics) {
    const auto t = exact_table<mp_real>(gaussian, 1, 6, 30);
    const auto w0 = eval_wave(t, gaussian, 0, 0.7);
    EXPECT_DOUBLE_EQ(w0.p_value, 1.0);
    EXPECT_NEAR(w0.psi, std::exp(-0.49 / 4) / std::sqrt(std::sqrt(2 * pi)), 1e-15);
    EXPECT_NEAR(eval_wave(t, gaussian, 1, 0.7).p_value, 0.7, 1e-15);
    const auto w3 = eval_wave(t, gaussian, 3, 1.0);
    EXPECT_NEAR(w3.p_value, -2.0, 1e-14);
    EXPECT_EQ(w3.sign_p, -1);
    EXPECT_NEAR(w3.log_abs_p, std::log(2.0), 1e-14);
    EXPECT_NEAR(w3.psi, w3.p_value * std::exp(-0.25) / std::sqrt(to_double(t.h[3])), 1e-15);
}

TEST(Wave, LargeValuesKeepLogMagnitude) {
    const auto t = exact_table<mp_real>(gaussian, 1, 200, 60);
    const auto w = eval_wave(t, gaussian, 200, 1e3);
    EXPECT_NEAR(w.log_abs_p, 200 * std::log(1e3), 0.1);
    EXPECT_TRUE(std::isfinite(w.log_abs_p));
}

TEST(Kernel, CDMatchesDirectSum) {
    const auto t = exact_table<mp_real>(gaussian, 8, 9, 30);
    const double cd = kernel_cd(t, gaussian, 8, 0.3, -0.2);
    const double direct = kernel_direct(t, gaussian, 8, 0.3, -0.2);
    EXPECT_NEAR(cd, direct, 1e-10 * std::abs(direct));
    EXPECT_DOUBLE_EQ(kernel_cd(t, gaussian, 8, 0.3, -0.2), kernel_cd(t, gaussian, 8, -0.2, 0.3));
}

TEST(Kernel, SingleTermAndConfluent) {
    const auto t = exact_table<mp_real>(quartic_one_cut, 5, 31, 40);
    const auto w0x = eval_wave(t, quartic_one_cut, 0, 0.4), w0y = eval_wave(t, quartic_one_cut, 0, -0.9);
    EXPECT_NEAR(kernel_cd(t, quartic_one_cut, 1, 0.4, -0.9), w0x.psi * w0y.psi, 1e-14);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int N = 1; N <= 30; N += 3) {
        for (int k = 0; k < 4; ++k) {
            const double x = u(rng), y = u(rng);
            const double direct = kernel_direct(t, quartic_one_cut, N, x, y);
            EXPECT_NEAR(kernel_cd(t, quartic_one_cut, N, x, y), direct, 1e-12 * (std::abs(direct) + 1e-3));
        }
        const double x = u(rng);
        const double diag = kernel_direct(t, quartic_one_cut, N, x, x);
        EXPECT_NEAR(kernel_cd(t, quartic_one_cut, N, x, x), diag, 1e-12 * diag);
        EXPECT_NEAR(kernel_cd(t, quartic_one_cut, N, x, x + 1e-9), diag, 1e-8 * diag);
        EXPECT_GE(kernel_cd(t, quartic_one_cut, N, x, x), 0.0);
    }
}

TEST(Correlation, Determinants) {
    const auto t = exact_table<mp_real>(gaussian, 2, 3, 30);
    const double l1 = 0.2, l2 = -0.6;
    EXPECT_GE(correlation(t, gaussian, 2, {l1}), 0.0);
    EXPECT_NEAR(correlation(t, gaussian, 2, {l1, l1}), 0.0, 1e-15);
    const double k11 = kernel_cd(t, gaussian, 2, l1, l1), k22 = kernel_cd(t, gaussian, 2, l2, l2),
                 k12 = kernel_cd(t, gaussian, 2, l1, l2);
    EXPECT_NEAR(correlation(t, gaussian, 2, {l1, l2}), k11 * k22 - k12 * k12, 1e-15);
    EXPECT_THROW(correlation(t, gaussian, 2, {0.1, 0.2, 0.3}), error);
}

TEST(Partition, SmallN) {
    const auto t1 = exact_table<mp_real>(gaussian, 1, 1, 30);
    EXPECT_NEAR(log_partition(t1, 1), std::log(std::sqrt(2 * pi)), 1e-15);
    const auto t2 = exact_table<mp_real>(gaussian, 2, 2, 30);
    const double z2 = trapezoid_partition(gaussian, 2, 2, 7.0, 301);
    EXPECT_NEAR(log_partition(t2, 2), std::log(z2), 1e-8);
    EXPECT_NEAR(log_partition(t2, 2), std::log(pi), 1e-14);
    const auto t3 = exact_table<mp_real>(gaussian, 3, 3, 30);
    const double z3 = trapezoid_partition(gaussian, 3, 3, 6.0, 121);
    EXPECT_NEAR(log_partition(t3, 3), std::log(z3), 1e-6);
}

TEST(Heine, MatchesRecurrence) {
    EXPECT_DOUBLE_EQ(heine_oracle(gaussian, 4, 0, 1.3), 1.0);
    EXPECT_NEAR(heine_oracle(gaussian, 4, 1, 1.3), 1.3, 1e-12);
    const auto t = exact_table<mp_real>(gaussian, 4, 3, 30);
    const double p2 = eval_wave(t, gaussian, 2, 1.3).p_value;
    EXPECT_NEAR(heine_oracle(gaussian, 4, 2, 1.3), p2, 1e-6 * std::abs(p2));
    EXPECT_THROW(heine_oracle(gaussian, 4, 5, 1.3), error);

    const Potential asym({0, 0.3, -1, 0.2, 0.25});
    const auto ta = exact_table<mp_real>(asym, 3, 3, 30);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 10; ++k) {
        const double xi = u(rng);
        for (int n = 1; n <= 3; ++n) {
            const double pn = eval_wave(ta, asym, n, xi).p_value;
            EXPECT_NEAR(heine_oracle(asym, 3, n, xi), pn, 1e-6 * std::max(1.0, std::abs(pn))) << n << " " << xi;
        }
    }
}

TEST(Recurrence, ApproachesOneCutGamma) {
    // V = x^2/2 + x^4/4: b^2 = 4R with R + 3R^2 = 1, gamma = sqrt(R)
    const double R = (-1 + std::sqrt(13.0)) / 6;
    double prev = 1e9;
    for (int N : {10, 20, 40}) {
        const auto t = exact_table<mp_real>(quartic_one_cut, N, N, std::max(30, 2 * N));
        const double err = std::abs(std::sqrt(to_double(t.b[static_cast<std::size_t>(N)])) - std::sqrt(R));
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LT(prev / std::sqrt(R), 0.02);
}
