#include <gtest/gtest.h>

#include <cmath>

#include <opasym/equilibrium.hpp>

using namespace opasym;

namespace {
const Potential gaussian({0, 0, 0.5});
const Potential quartic_one_cut({0, 0, 0.5, 0, 0.25});
const Potential quartic_two_cut({0, 0, -2, 0, 0.25});
}

TEST(OneCut, Gaussian) {
    const auto m = solve_one_cut(gaussian);
    ASSERT_EQ(m.s(), 1);
    EXPECT_NEAR(m.cuts[0].a, -2.0, 1e-12);
    EXPECT_NEAR(m.cuts[0].b, 2.0, 1e-12);
    ASSERT_EQ(m.M.size(), 1u);
    EXPECT_NEAR(m.M[0], 1.0, 1e-12);
    EXPECT_NEAR((m.cuts[0].b - m.cuts[0].a) / 4, 1.0, 1e-12);
    for (double x : {-1.5, 0.0, 0.5, 1.9})
        EXPECT_NEAR(density(m, x), std::sqrt(4 - x * x) / (2 * pi), 1e-13);
    EXPECT_NEAR(total_mass(m), 1.0, 1e-12);
}

TEST(OneCut, QuarticClosedForm) {
    const auto m = solve_one_cut(quartic_one_cut);
    const double R = (-1 + std::sqrt(13.0)) / 6;
    EXPECT_NEAR(m.cuts[0].b, 2 * std::sqrt(R), 1e-12);
    EXPECT_NEAR(m.cuts[0].a, -2 * std::sqrt(R), 1e-12);
    EXPECT_NEAR(total_mass(m), 1.0, 1e-10);
}

TEST(OneCut, NegativeDensityDiagnostic) {
    try {
        solve_one_cut(quartic_two_cut);
        FAIL() << "expected model_mismatch";
    } catch (const model_mismatch& e) {
        EXPECT_NE(std::string(e.what()).find("negative density at x≈"), std::string::npos) << e.what();
    }
}

TEST(MultiCut, SymmetricQuartic) {
    const auto m = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.5, 0.5});
    ASSERT_EQ(m.s(), 2);
    EXPECT_NEAR(m.cuts[0].a, -std::sqrt(6.0), 1e-10);
    EXPECT_NEAR(m.cuts[0].b, -std::sqrt(2.0), 1e-10);
    EXPECT_NEAR(m.cuts[1].a, std::sqrt(2.0), 1e-10);
    EXPECT_NEAR(m.cuts[1].b, std::sqrt(6.0), 1e-10);
    ASSERT_EQ(m.M.size(), 2u);
    EXPECT_NEAR(m.M[0], 0.0, 1e-10);
    EXPECT_NEAR(m.M[1], 1.0, 1e-10);
    EXPECT_NEAR(total_mass(m), 1.0, 1e-10);
    EXPECT_NEAR(cut_mass(m, 0), 0.5, 1e-10);
    for (int k = 0; k < 2; ++k) {
        const auto& c = m.cuts[static_cast<std::size_t>(k)];
        for (int i = 1; i <= 20; ++i) {
            const double x = c.a + c.width() * i / 21.0;
            EXPECT_GE(density(m, x), 0.0);
            EXPECT_LE(saddle_residual(m, quartic_two_cut, x), 1e-10) << x;
        }
    }
    EXPECT_LE(saddle_residual(m, quartic_two_cut, 1.7), 1e-10);
}

TEST(MultiCut, AsymmetricFillings) {
    const auto m = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.3, 0.7});
    EXPECT_NEAR(cut_mass(m, 0), 0.3, 1e-10);
    EXPECT_NEAR(cut_mass(m, 1), 0.7, 1e-10);
    EXPECT_GT(m.cuts[1].width(), m.cuts[0].width());
}

TEST(MultiCut, SingleCutReproducesOneCut) {
    const auto a = solve_cuts(quartic_one_cut, 1.0, 1, {1.0});
    const auto b = solve_one_cut(quartic_one_cut);
    EXPECT_NEAR(a.cuts[0].a, b.cuts[0].a, 1e-10);
    EXPECT_NEAR(a.cuts[0].b, b.cuts[0].b, 1e-10);
}

TEST(Resolvent, GaussianClosedForm) {
    const auto m = solve_one_cut(gaussian);
    EXPECT_NEAR(std::abs(resolvent(m, gaussian, 10.0) - (10 - std::sqrt(96.0)) / 2), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(1e4 * resolvent(m, gaussian, 1e4) - 1.0), 0.0, 1e-6);
    const cplx z(0.7, 1.3);
    EXPECT_NEAR(std::abs(resolvent(m, gaussian, std::conj(z)) - std::conj(resolvent(m, gaussian, z))), 0.0, 1e-14);
    EXPECT_THROW(resolvent(m, gaussian, 2.0), numerical_error);
    EXPECT_THROW(resolvent(m, gaussian, 0.5), error);
    EXPECT_LE(saddle_residual(m, gaussian, 0.5), 1e-12);
}

TEST(Resolvent, ContourAndDiscontinuity) {
    const auto m = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.5, 0.5});
    // circle of radius 4 around the support: (1/2 pi i) int omega dx = T
    const cplx I(0, 1);
    const cplx loop = integrate_adaptive(
        [&](double t) { const cplx z = 4.0 * std::exp(I * t); return resolvent(m, quartic_two_cut, z) * I * z; }, 0.0, 2 * pi, 1e-13);
    EXPECT_NEAR(std::abs(loop / (2 * pi * I) - 1.0), 0.0, 1e-8);
    for (double x : {-2.2, -1.6, 1.5, 2.0, 2.4}) {
        const cplx jump = resolvent_boundary(m, quartic_two_cut, x, 1) - resolvent_boundary(m, quartic_two_cut, x, -1);
        EXPECT_NEAR((-jump / (2 * pi * I * m.T)).real(), density(m, x), 1e-10);
        EXPECT_NEAR((-jump / (2 * pi * I * m.T)).imag(), 0.0, 1e-14);
    }
}

TEST(EffectivePotential, GaussianDifferenceAndFlatness) {
    const auto m = solve_one_cut(gaussian);
    const double diff = (effective_potential(m, gaussian, 3.0) - effective_potential(m, gaussian, 2.0)).real();
    const double oracle = integrate_adaptive([](double t) { return std::sqrt(t * t - 4); }, 2.0, 3.0, 1e-14);
    EXPECT_NEAR(diff, oracle, 1e-10);
    // closed form of the primitive
    const double closed = 1.5 * std::sqrt(5.0) - 2 * std::log((3 + std::sqrt(5.0)) / 2);
    EXPECT_NEAR(diff, closed, 1e-10);
    const double vb = effective_potential(m, gaussian, 2.0).real();
    for (double x : {-1.9, -0.5, 0.0, 1.2}) EXPECT_NEAR(effective_potential(m, gaussian, x).real(), vb, 1e-8);
    EXPECT_NEAR(effective_potential(m, gaussian, 3.0).imag(), 0.0, 1e-14);
    // normalisation at infinity: V_eff - V + 2 ln x -> 0
    const double X = 200.0;
    EXPECT_NEAR(effective_potential(m, gaussian, X).real() - gaussian.value(X) + 2 * std::log(X), 0.0, 1e-4);
    EXPECT_NEAR(std::abs(effective_potential_b(m, gaussian, 2.0)), 0.0, 1e-14);
}

TEST(EffectivePotential, TwoCutFlatOnEachCut) {
    const auto m = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.5, 0.5});
    const double r = effective_potential(m, quartic_two_cut, std::sqrt(6.0)).real();
    for (double x : {-2.3, -1.6, 1.5, 2.0})
        EXPECT_NEAR(effective_potential(m, quartic_two_cut, x).real(), r, 1e-8);
}

TEST(EffectivePotential, RealAxisPathMatchesLogIntegral) {
    const auto m = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.3, 0.7});
    for (double x : {-3.5, -2.5, -1.2, 0.0, 0.6, 1.1, 2.5, 3.3, 6.0}) {
        const cplx fast = effective_potential(m, quartic_two_cut, cplx(x, 0.0));
        const cplx direct = effective_potential_direct(m, quartic_two_cut, cplx(x, 0.0));
        EXPECT_LT(std::abs(fast - direct), 1e-9 * (1.0 + std::abs(direct))) << x;
    }
}

TEST(Regime, Classification) {
    const auto m = solve_one_cut(gaussian);
    EXPECT_EQ(classify_regime(m, 3.0, 1e-3).kind, Regime::outside);
    const auto t = classify_regime(m, 0.5, 1e-3);
    EXPECT_EQ(t.kind, Regime::on_cut);
    EXPECT_EQ(t.cut, 0);
    EXPECT_EQ(classify_regime(m, 2.0 + 1e-9, 1e-3).kind, Regime::excluded_edge);
    EXPECT_EQ(classify_regime(m, cplx(0.5, 0.2), 1e-3).kind, Regime::outside);
}

TEST(Fillings, GradientVanishesAtSymmetricPoint) {
    const auto m = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.5, 0.5});
    EXPECT_NEAR(filling_gradient(m)[0], 0.0, 1e-10);
    const auto m2 = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.4, 0.6});
    EXPECT_GT(std::abs(filling_gradient(m2)[0]), 1e-3);
}
