#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include <opasym/genus0.hpp>
#include <opasym/riemann.hpp>

using namespace opasym;

namespace {

const Potential quartic_two_cut({0, 0, -2, 0, 0.25});
const std::vector<double> three_cut_roots{-3.0, -2.0, -0.5, 0.5, 2.0, 3.2};

struct Genus1 {
    EquilibriumMeasure meas = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.5, 0.5});
    SpectralCurve curve = SpectralCurve::from_measure(meas);
    PeriodData pd = compute_periods(curve);
    ThetaContext ctx{pd.tau};
};

const Genus1& genus1() {
    static const Genus1 g;
    return g;
}

cvec lattice_point(const cmat& tau, const std::vector<int>& m, const std::vector<int>& n) {
    cvec v(static_cast<Eigen::Index>(m.size()));
    cvec nn(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = m[i];
        nn(static_cast<Eigen::Index>(i)) = n[i];
    }
    return v + tau * nn;
}

/// Counter-clockwise loop integral of f over the circle |x - c| = r.
cplx loop(const std::function<cplx(cplx)>& f, cplx c, double r) {
    return integrate_adaptive(
        [&](double t) {
            const cplx e = std::polar(1.0, t);
            return f(c + r * e) * cplx(0.0, r) * e;
        },
        0.0, 2 * pi, 1e-12);
}

/// Counter-clockwise ellipse around [a, b] on the physical sheet.
cplx loop_around_cut(const std::function<cplx(cplx)>& f, double a, double b, double margin) {
    const double c = 0.5 * (a + b), ra = 0.5 * (b - a) + margin;
    return integrate_adaptive(
        [&](double t) {
            const cplx x(c + ra * std::cos(t), margin * std::sin(t));
            const cplx dx(-ra * std::sin(t), margin * std::cos(t));
            return f(x) * dx;
        },
        0.0, 2 * pi, 1e-12);
}

} // namespace

TEST(Curve, Validation) {
    EXPECT_THROW(SpectralCurve({-1.0, 1.0}), error);
    EXPECT_THROW(SpectralCurve({-1.0, 1.0, 0.5, 2.0}), error);
    EXPECT_THROW(SpectralCurve({-1.0, 0.0, 1.0}), error);
    const SpectralCurve c(three_cut_roots);
    EXPECT_EQ(c.genus(), 2);
    const auto cycles = build_homology(c);
    ASSERT_EQ(cycles.size(), 4u);
    EXPECT_EQ(cycles[0].kind, 'A');
    EXPECT_EQ(cycles[3].kind, 'B');
}

TEST(Periods, SymmetricGenusOne) {
    const auto& g = genus1();
    EXPECT_LT(g.pd.normalization_residual, 1e-13);
    EXPECT_LT(std::abs(g.pd.tau(0, 0).real()), 1e-12);
    EXPECT_GT(g.pd.tau(0, 0).imag(), 0.0);
    // A-period of du around cut 0, by direct contour integration
    const cplx A = loop_around_cut([&](cplx x) { return du_dx(g.curve, g.pd, SurfacePoint::at(x))(0); },
                                   g.curve.a(0), g.curve.b(0), 0.3);
    EXPECT_NEAR(std::abs(A - 1.0), 0.0, 1e-10);
}

TEST(Periods, GenusTwoSymmetricPositive) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    EXPECT_LT(pd.asymmetry, 1e-10);
    EXPECT_LT(pd.normalization_residual, 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pd.tau.imag());
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i) {
            const cplx A = loop_around_cut([&](cplx x) { return du_dx(c, pd, SurfacePoint::at(x))(i); }, c.a(k), c.b(k), 0.2);
            EXPECT_NEAR(std::abs(A - (i == k ? 1.0 : 0.0)), 0.0, 1e-9);
        }
}

TEST(Periods, ContourDeformationAndReflection) {
    const auto& g = genus1();
    auto inv = [&](cplx x) { return 1.0 / sqrt_sigma(g.meas.roots(), x); };
    const cplx near = loop_around_cut(inv, g.curve.a(0), g.curve.b(0), 0.2);
    const cplx wide = loop_around_cut(inv, g.curve.a(0), g.curve.b(0), 0.5);
    EXPECT_LT(std::abs(near - wide), 1e-10);
    EXPECT_LT(std::abs(near.real()), 1e-12);  // dx/sqrt(sigma) has purely imaginary A-period
    // x -> -x maps cut 0 onto cut 1; the two A-periods are opposite
    const cplx other = loop_around_cut(inv, g.curve.a(1), g.curve.b(1), 0.2);
    EXPECT_LT(std::abs(near + other), 1e-10);
}

TEST(Periods, QuarticCurveHalfIntegerRealPart) {
    const SpectralCurve c({-std::sqrt(6.0), -std::sqrt(2.0), std::sqrt(2.0), std::sqrt(6.0)});
    const auto pd = compute_periods(c);
    const double r = pd.tau(0, 0).real() - std::floor(pd.tau(0, 0).real());
    EXPECT_LT(std::min({r, std::abs(r - 0.5), 1.0 - r}), 1e-8);
    EXPECT_GT(pd.tau(0, 0).imag(), 0.0);
}

TEST(Theta, ClosedFormAtI) {
    cmat tau(1, 1);
    tau(0, 0) = cplx(0.0, 1.0);
    ThetaContext ctx(tau);
    const double expected = std::pow(pi, 0.25) / boost::math::tgamma(0.75);
    EXPECT_NEAR(std::abs(ctx.theta(cvec::Zero(1)) - expected), 0.0, 1e-14);
    EXPECT_NEAR(expected, 1.0864348112133080, 1e-15);
}

TEST(Theta, QuasiPeriodicityAndParity) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    ThetaContext ctx(pd.tau);
    cvec u(2);
    u << cplx(0.13, 0.07), cplx(-0.21, 0.11);
    const cplx th = ctx.theta(u);
    const std::vector<std::vector<int>> ms{{1, 0}, {0, 1}, {2, -1}};
    for (const auto& m : ms) {
        cvec mc(2);
        mc << m[0], m[1];
        EXPECT_NEAR(std::abs(ctx.theta(u + mc) / th - 1.0), 0.0, 1e-12);
        const cplx fac = std::exp(cplx(0.0, -pi) * (2.0 * (mc.transpose() * u)(0) + (mc.transpose() * pd.tau * mc)(0)));
        EXPECT_NEAR(std::abs(ctx.theta(u + pd.tau * mc) / (fac * th) - 1.0), 0.0, 1e-11);
        // theta_z: quasi-periodicity with the characteristic signs
        const cplx tz = ctx.theta_char(u);
        const double s1 = (ctx.m2().dot(Eigen::Vector2i(m[0], m[1])) % 2 == 0) ? 1.0 : -1.0;
        const double s2 = (ctx.m1().dot(Eigen::Vector2i(m[0], m[1])) % 2 == 0) ? 1.0 : -1.0;
        EXPECT_NEAR(std::abs(ctx.theta_char(u + mc) - s1 * tz), 0.0, 1e-11 * std::abs(tz));
        EXPECT_NEAR(std::abs(ctx.theta_char(u + pd.tau * mc) - s2 * fac * tz), 0.0, 1e-10 * std::abs(fac * tz));
    }
    EXPECT_NEAR(std::abs(ctx.theta(-u) - th), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(ctx.theta_char(-u) + ctx.theta_char(u)), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(ctx.theta_char(cvec::Zero(2))), 0.0, 1e-13);
    // large arguments stay finite in log form
    const cvec far = u + pd.tau * Eigen::Vector2d(40.0, -25.0).cast<cplx>();
    const cplx lf = ctx.log_theta(far);
    EXPECT_TRUE(std::isfinite(lf.real()));
}

TEST(Theta, TruncationRadiusConverged) {
    cmat tau(1, 1);
    tau(0, 0) = cplx(0.1, 0.8);
    ThetaContext ctx(tau);
    const cplx u(0.3, -0.2);
    auto sum = [&](int R) {
        cplx acc(0.0);
        for (int m = -R; m <= R; ++m) acc += std::exp(cplx(0.0, pi) * tau(0, 0) * double(m * m) + cplx(0.0, 2 * pi) * double(m) * u);
        return acc;
    };
    EXPECT_LT(std::abs(sum(10) - sum(20)), 1e-14);
    EXPECT_LT(std::abs(ctx.theta(cvec::Constant(1, u)) - sum(20)), 1e-13);
}

TEST(Theta, GenusOneOddCharacteristicIsClassical) {
    cmat tau(1, 1);
    tau(0, 0) = cplx(0.2, 1.1);
    ThetaContext ctx(tau);
    ASSERT_EQ(ctx.m1()(0), 1);
    ASSERT_EQ(ctx.m2()(0), 1);
    // theta[1/2, 1/2](u) = sum_n exp(i pi (n+1/2)^2 tau + 2 i pi (n+1/2)(u+1/2))
    for (cplx u : {cplx(0.0), cplx(0.17, 0.05), cplx(-0.3, 0.2)}) {
        cplx direct(0.0);
        for (int n = -20; n <= 20; ++n) {
            const double a = n + 0.5;
            direct += std::exp(cplx(0.0, pi) * a * a * tau(0, 0) + cplx(0.0, 2 * pi) * a * (u + 0.5));
        }
        EXPECT_LT(std::abs(ctx.theta_char(cvec::Constant(1, u)) - direct), 1e-13) << u;
    }
}

TEST(Theta, GradientMatchesFiniteDifference) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    ThetaContext ctx(pd.tau);
    cvec u(2);
    u << cplx(0.3, 0.2), cplx(0.1, -0.4);
    const cvec g = ctx.grad_theta(u), gz = ctx.grad_theta_char(u);
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
        cvec e = cvec::Zero(2);
        e(i) = h;
        const cplx fd = (ctx.theta(u + e) - ctx.theta(u - e)) / (2 * h);
        const cplx fdz = (ctx.theta_char(u + e) - ctx.theta_char(u - e)) / (2 * h);
        EXPECT_NEAR(std::abs(fd - g(i)), 0.0, 1e-7 * std::abs(g(i)) + 1e-9);
        EXPECT_NEAR(std::abs(fdz - gz(i)), 0.0, 1e-7 * std::abs(gz(i)) + 1e-9);
    }
}

TEST(Theta, ShiftedCharacteristicIdentity) {
    const auto& g = genus1();
    Eigen::VectorXd d(1);
    d << 0.37;
    cvec u(1);
    u << cplx(0.2, 0.05);
    cplx direct(0.0);
    for (int m = -30; m <= 30; ++m) {
        const cplx md = m + d(0);
        direct += std::exp(cplx(0.0, pi) * md * g.pd.tau(0, 0) * md + cplx(0.0, 2 * pi) * md * u(0));
    }
    EXPECT_NEAR(std::abs(std::exp(g.ctx.log_theta_shifted(d, u)) - direct), 0.0, 1e-13);
}

TEST(Abel, BranchPointsAreHalfPeriods) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    for (double r : three_cut_roots) {
        const cvec two_u = 2.0 * abel_map(c, pd, SurfacePoint::at(cplx(r, 0.0)));
        const Eigen::VectorXd n = pd.tau.imag().inverse() * two_u.imag();
        const cvec m = two_u - pd.tau * n.cast<cplx>();
        for (int i = 0; i < 2; ++i) {
            EXPECT_NEAR(n(i), std::round(n(i)), 1e-9) << "root " << r;
            EXPECT_NEAR(std::abs(m(i) - std::round(m(i).real())), 0.0, 1e-9) << "root " << r;
        }
    }
}

TEST(Abel, DerivativeAndSheets) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    for (cplx x : {cplx(0.7, 0.4), cplx(-1.2, -0.9), cplx(4.0, 0.0), cplx(1.0, 0.0)}) {
        const double h = 1e-5;
        const cplx dir = x.imag() == 0.0 ? cplx(1.0) : cplx(0.6, 0.8);
        const cvec fd = (abel_map(c, pd, SurfacePoint::at(x + h * dir)) - abel_map(c, pd, SurfacePoint::at(x - h * dir))) / (2 * h);
        const cvec an = du_dx(c, pd, SurfacePoint::at(x)) * dir;
        EXPECT_LT((fd - an).norm(), 1e-7) << x;
        const cvec up = abel_map(c, pd, SurfacePoint::at(x)), dn = abel_map(c, pd, SurfacePoint::at(x, -1));
        EXPECT_LT((up + dn).norm(), 1e-14);
    }
    const cvec ip = abel_map(c, pd, SurfacePoint::infinity(1));
    const cvec far = abel_map(c, pd, SurfacePoint::at(cplx(1e4, 0.0)));
    EXPECT_LT((ip - far).norm(), 1e-3);
}

TEST(PrimeForm, AntisymmetryAndDiagonal) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    ThetaContext ctx(pd.tau);
    choose_characteristic(ctx, c, pd);
    const auto p = SurfacePoint::at(cplx(0.9, 0.5)), q = SurfacePoint::at(cplx(-1.1, 0.3));
    EXPECT_NEAR(std::abs(prime_form(ctx, c, pd, p, q) + prime_form(ctx, c, pd, q, p)), 0.0, 1e-12);
    // E(p, q) ~ x(p) - x(q) for nearby points
    const auto q2 = SurfacePoint::at(p.x + cplx(1e-5, 0.0));
    EXPECT_NEAR(std::abs(prime_form(ctx, c, pd, p, q2) / (p.x - q2.x) - 1.0), 0.0, 1e-4);
}

TEST(PrimeForm, IndependentOfCharacteristic) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    ThetaContext ctx(pd.tau);
    const auto p = SurfacePoint::at(cplx(0.9, 0.5)), q = SurfacePoint::at(cplx(-1.1, 0.3), -1);
    std::vector<cplx> values;
    for (const auto& ch : ThetaContext::odd_characteristics(2)) {
        ctx.set_characteristic(ch);
        if (theta_char_gradient0(ctx).norm() < 1e-6) continue;
        values.push_back(prime_form(ctx, c, pd, p, q));
    }
    ASSERT_GE(values.size(), 2u);
    // the square roots of dh_z fix E only up to sign
    for (const cplx v : values) EXPECT_LT(std::min(std::abs(v - values[0]), std::abs(v + values[0])), 1e-6 * std::abs(values[0]));
}

TEST(ThirdKind, ResiduesAndPeriods) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    const auto q1 = SurfacePoint::at(cplx(1.2, 0.4)), q2 = SurfacePoint::at(cplx(-1.0, -0.6), -1);
    const auto t = third_kind(c, q1, q2);
    auto on = [&](int sheet) { return [&, sheet](cplx x) { return third_kind_dS(c, pd, t, SurfacePoint::at(x, sheet)); }; };
    EXPECT_NEAR(std::abs(loop(on(1), q1.x, 0.05) / cplx(0.0, 2 * pi) - 1.0), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(loop(on(-1), q2.x, 0.05) / cplx(0.0, 2 * pi) + 1.0), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(loop(on(-1), q1.x, 0.05)), 0.0, 1e-10);
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(std::abs(loop_around_cut(on(1), c.a(k), c.b(k), 0.15)), 0.0, 1e-9);

    // residues at infinity: clockwise loop in x is the positive loop in 1/x
    const auto ti = third_kind(c, SurfacePoint::infinity(1), SurfacePoint::infinity(-1));
    auto inf = [&](int sheet) { return [&, sheet](cplx x) { return third_kind_dS(c, pd, ti, SurfacePoint::at(x, sheet)); }; };
    EXPECT_NEAR(std::abs(-loop(inf(1), 0.0, 20.0) / cplx(0.0, 2 * pi) - 1.0), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(-loop(inf(-1), 0.0, 20.0) / cplx(0.0, 2 * pi) + 1.0), 0.0, 1e-10);
}

TEST(ThirdKind, SwapAntisymmetry) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    const auto q1 = SurfacePoint::at(cplx(1.2, 0.4)), q2 = SurfacePoint::infinity(-1);
    for (cplx x : {cplx(0.3, 0.8), cplx(-2.5, -0.2), cplx(4.0, 1.0)})
        for (int sheet : {1, -1}) {
            const auto p = SurfacePoint::at(x, sheet);
            const cplx a = third_kind_dS(c, pd, q1, q2, p), b = third_kind_dS(c, pd, q2, q1, p);
            EXPECT_LT(std::abs(a + b), 1e-12 * std::abs(a)) << x;
        }
}

TEST(ThirdKind, LogDerivativeOfPrimeFormRatio) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    ThetaContext ctx(pd.tau);
    choose_characteristic(ctx, c, pd);
    const auto q1 = SurfacePoint::at(cplx(1.2, 0.4)), q2 = SurfacePoint::at(cplx(-1.0, -0.6), -1);
    const cvec u1 = abel_map(c, pd, q1), u2 = abel_map(c, pd, q2);
    for (cplx x : {cplx(0.2, 0.8), cplx(2.6, -0.3), cplx(5.0, 1.0)}) {
        const auto p = SurfacePoint::at(x);
        const cvec up = abel_map(c, pd, p), du = du_dx(c, pd, p);
        auto dlog = [&](const cvec& uq) {
            return (ctx.grad_theta_char(up - uq).transpose() * du)(0) / ctx.theta_char(up - uq);
        };
        const cplx expected = dlog(u1) - dlog(u2);
        EXPECT_NEAR(std::abs(third_kind_dS(c, pd, q1, q2, p) - expected), 0.0, 1e-9 * (1 + std::abs(expected))) << x;
    }
}

TEST(LambdaH, TwoFormsAgreeAndNormalisation) {
    const SpectralCurve c(three_cut_roots);
    const auto pd = compute_periods(c);
    ThetaContext ctx(pd.tau);
    choose_characteristic(ctx, c, pd);
    const auto d = genus_g_data(ctx, c, pd);
    for (cplx x : {cplx(0.3, 0.9), cplx(4.0, 0.0), cplx(-3.5, 0.0), cplx(1.0, -0.5)}) {
        const auto p = SurfacePoint::at(x);
        const auto lh = lambda_h_genusg(ctx, c, pd, d, p);
        EXPECT_NEAR(std::abs(h_from_dh(ctx, c, pd, d, p) / lh.H - 1.0), 0.0, 1e-9) << x;
    }
    const auto big = SurfacePoint::at(cplx(1e5, 1e4));
    const auto lh = lambda_h_genusg(ctx, c, pd, d, big);
    EXPECT_NEAR(std::abs(lh.Lambda / big.x - 1.0), 0.0, 1e-4);
    EXPECT_NEAR(std::abs(lh.H - 1.0), 0.0, 1e-4);
}

TEST(Oracles, GenusZeroTemperatureDerivative) {
    const Potential quartic({0, 0, 0.5, 0, 0.25});
    const double dT = 1e-5;
    const auto mp = solve_one_cut(quartic, 1.0 + dT), mm = solve_one_cut(quartic, 1.0 - dT);
    const auto m0 = solve_one_cut(quartic);
    const auto map = JoukowskiMap::from_measure(m0);
    for (cplx x : {cplx(0.4, 0.7), cplx(3.0, 0.0), cplx(-2.0, -1.0)}) {
        const cplx fd = (resolvent(mp, quartic, x) - resolvent(mm, quartic, x)) / (2 * dT);
        const cplx p = map_to_p(map, x).p;
        const cplx dlogp = 1.0 / (p * map.dx_dp(p));
        EXPECT_NEAR(std::abs(fd - dlogp), 0.0, 1e-7) << x;
    }
}

TEST(Oracles, GenusOneTemperatureDerivative) {
    const auto& g = genus1();
    const double dT = 1e-5;
    const auto mp = solve_multi_cut(quartic_two_cut, 1.0 + dT, 2, {0.5, 0.5 + dT});
    const auto mm = solve_multi_cut(quartic_two_cut, 1.0 - dT, 2, {0.5, 0.5 - dT});
    const auto t = third_kind(g.curve, SurfacePoint::infinity(1), SurfacePoint::infinity(-1));
    for (cplx x : {cplx(0.3, 0.7), cplx(3.0, 0.5), cplx(4.0, 0.0), cplx(-1.0, -1.5)}) {
        const cplx fd = (resolvent(mp, quartic_two_cut, x) - resolvent(mm, quartic_two_cut, x)) / (2 * dT);
        const cplx ds = third_kind_dS(g.curve, g.pd, t, SurfacePoint::at(x));
        EXPECT_NEAR(std::abs(fd + ds), 0.0, 1e-6) << x;
    }
}

TEST(Oracles, GenusOneChargeDerivative) {
    const auto& g = genus1();
    const double xi = 0.0, dh = 1e-5;
    SolveOptions plus, minus;
    plus.charge = LogCharge{dh, xi};
    minus.charge = LogCharge{-dh, xi};
    plus.check_density = minus.check_density = false;
    const auto mp = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.5, 0.5}, plus);
    const auto mm = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.5, 0.5}, minus);
    const auto t = third_kind(g.curve, SurfacePoint::infinity(-1), SurfacePoint::at(cplx(xi, 0.0), -1));
    for (cplx x : {cplx(0.3, 0.7), cplx(3.0, 0.5), cplx(-1.0, -1.5)}) {
        const cplx fd = (resolvent(mp, quartic_two_cut, x) - resolvent(mm, quartic_two_cut, x)) / (2 * dh);
        const cplx ds = third_kind_dS(g.curve, g.pd, t, SurfacePoint::at(x));
        EXPECT_NEAR(std::abs(fd - ds), 0.0, 1e-6) << x;
    }
}

TEST(Oracles, FillingHessianAndMixedDerivative) {
    const auto& g = genus1();
    const double de = 1e-5;
    const auto mp = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.5 + de, 0.5 - de});
    const auto mm = solve_multi_cut(quartic_two_cut, 1.0, 2, {0.5 - de, 0.5 + de});
    const double hess = (filling_gradient(mp)[0] - filling_gradient(mm)[0]) / (2 * de);
    const cplx expected = cplx(0.0, -2 * pi) * g.pd.tau(0, 0);
    EXPECT_NEAR(expected.imag(), 0.0, 1e-12);
    EXPECT_NEAR(hess / expected.real() - 1.0, 0.0, 1e-6);

    const auto tp = solve_multi_cut(quartic_two_cut, 1.0 + de, 2, {0.5, 0.5 + de});
    const auto tm = solve_multi_cut(quartic_two_cut, 1.0 - de, 2, {0.5, 0.5 - de});
    const double mixed = (filling_gradient(tp)[0] - filling_gradient(tm)[0]) / (2 * de);
    const cvec uinf = abel_map(g.curve, g.pd, SurfacePoint::infinity(1));
    const cplx expected_mixed = cplx(0.0, 2 * pi) * (2.0 * uinf(0));
    EXPECT_NEAR(std::abs(mixed - expected_mixed), 0.0, 1e-6 * (1 + std::abs(expected_mixed)));
}
