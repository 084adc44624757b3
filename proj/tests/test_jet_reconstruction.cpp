#include <doctest.h>

#include <cmath>

#include "caustica/jet_reconstruction.hpp"

using namespace caustica;

namespace {

const ChartMetric kFlat{};

// Lower branch of the ellipse x^2/a^2 + (y - b)^2/b^2 = 1 through the origin.
template <int N>
Taylor<double, N> ellipse_graph(double x, double a, double b) {
    using J = Taylor<double, N>;
    J v = J::variable(x);
    return J(b) - J(b) * sqrt(J(1.0) - v * v / J(a * a));
}

Jet4 ellipse_jet(double x, double a = 2.0, double b = 1.0) {
    auto t = ellipse_graph<4>(x, a, b);
    Jet4 j{x, {}};
    for (int k = 0; k < 5; ++k) j.b[k] = t.derivative(k);
    return j;
}

double ellipse_b5(double x, double a = 2.0, double b = 1.0) { return ellipse_graph<5>(x, a, b).derivative(5); }

double circle_y(double x) { return 1.0 - std::sqrt(1.0 - x * x); }

// y = x^2/2 + b5 x^5/120 in the flat chart
GraphJet quintic(double b5) { return {0.0, {0.0, 0.0, 1.0, 0.0, 0.0, b5}}; }

}  // namespace

TEST_CASE("Lambda coefficients vanish on conics") {
    LambdaTaylor c = lambda_taylor(make_circle(1.0), 7);
    REQUIRE(c.coefficients.size() == 5);
    for (double v : c.coefficients) CHECK(std::abs(v) < 1e-9);

    CurveOptions off;
    off.base_parameter = 0.7;
    for (const ConvexCurve& k : {make_ellipse(2.0, 1.0, off), make_geodesic_circle(Surface::sphere(), 0.6),
                                 make_conic({SurfaceKind::sphere, Eigen::Vector3d(1.0, 2.0, -0.3).asDiagonal()}),
                                 make_conic({SurfaceKind::hyperbolic, Eigen::Vector3d(1.0, 2.0, -0.3).asDiagonal()})}) {
        CAPTURE(k.model().description);
        LambdaTaylor l = lambda_taylor(k, 7);
        for (int n = 3; n <= 7; ++n) CHECK(std::abs(l.coefficient(n)) < 1e-9);
    }

    // a parabola is a conic too, and its graph jets are exact
    LambdaTaylor p = lambda_taylor(GraphJet{0.3, {0.045, 0.3, 1.0}}, kFlat, 7);
    for (double v : p.coefficients) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("the quartic oval has a nonzero Lambda_6 off its symmetry axes") {
    CurveOptions o;
    o.base_parameter = 0.6;  // between an axis (a flat point) and the diagonal
    LambdaTaylor q = lambda_taylor(make_quartic_oval(1.0, o), 6);
    CHECK(std::abs(q.coefficient(6)) > 1e-4);
    CHECK(std::abs(q.coefficient(6)) > 100 * q.error_of(6));
    CHECK(std::abs(q.coefficient(3)) < 1e-9);  // Lambda_3 .. Lambda_5 vanish for every curve
    CHECK(std::abs(q.coefficient(5)) < 1e-9);
}

TEST_CASE("ladder preconditions") {
    Surface chart = Surface::general_chart([](const Vec2&) { return Mat2(Mat2::Identity()); });
    ConvexCurve cc(chart, make_model(curves::Ellipse{1.0, 1.0}, 0.0, 2 * M_PI, true, "unit circle"));
    CHECK_THROWS_AS(lambda_taylor(cc, 6), UnsupportedKindError);
    LadderOptions coarse;
    coarse.t0 = 1.0;
    CHECK_THROWS_AS(lambda_taylor(make_circle(1.0), 6, coarse), IllConditionedError);
    LadderOptions fine;
    fine.levels = 20;
    CHECK_THROWS_AS(lambda_taylor(make_circle(1.0), 6, fine), IllConditionedError);
    CHECK_THROWS_AS(lambda_taylor(make_circle(1.0), 12), InputError);
}

TEST_CASE("sigma_n") {
    CHECK(sigma_n(1.0, 1.0, 1.0, 5) == doctest::Approx(1.0 / 720.0).epsilon(1e-15));
    CHECK(sigma_n(1.0, 1.0, 1.0, 3) == 0.0);
    CHECK(sigma_n(1.0, 1.0, 1.0, 4) == 0.0);
    CHECK(sigma_n(1.0, 1.0, 1.0, 6) == 0.0);
    CHECK(sigma_n(1.0, 1.0, 1.0, 7) == doctest::Approx(20.0 / (6.0 * 40320.0)).epsilon(1e-15));
    CHECK(sigma_n(2.0, 1.0, 1.0, 5) == doctest::Approx(1.0 / (720.0 * 32.0)).epsilon(1e-15));
    // the jet version reads kappa, |u| and |w| off the graph
    CHECK(sigma_n(GraphJet{0.0, {0.0, 0.0, 1.0}}, kFlat, 5) == doctest::Approx(1.0 / 720.0).epsilon(1e-15));
    const double b1 = 0.4, q = std::sqrt(1 + b1 * b1), kappa = 1.5 / (q * q * q);
    CHECK(sigma_n(GraphJet{0.0, {0.0, b1, 1.5}}, kFlat, 5) ==
          doctest::Approx(sigma_n(kappa, 1.0 / q, q, 5)).epsilon(1e-15));
}

TEST_CASE("Lambda_6 is affine in b5 with slope sigma_5") {
    double l[3];
    for (int i = 0; i < 3; ++i) l[i] = lambda_taylor(quintic(double(i)), kFlat, 6).coefficient(6);
    CHECK(std::abs(l[0]) < 1e-12);  // the parabola
    CHECK(l[1] == doctest::Approx(1.0 / 720.0).epsilon(0.02));
    const double slope = l[1] - l[0];
    CHECK(slope == doctest::Approx(1.0 / 720.0).epsilon(0.02));
    CHECK(std::abs(l[2] - 2 * l[1] + l[0]) < 0.01 * std::abs(slope));

    // a tilted, non-symmetric base jet: still affine, slope sigma_5 of its 2-jet
    GraphJet g{0.1, {0.02, 0.3, 1.4, 0.5, -0.7, 0.0}};
    double m[3];
    for (int i = 0; i < 3; ++i) {
        g.b[5] = 2.0 * i;
        m[i] = lambda_taylor(g, kFlat, 6).coefficient(6);
    }
    CHECK((m[1] - m[0]) / 2.0 == doctest::Approx(sigma_n(g, kFlat, 5)).epsilon(0.02));
    CHECK(std::abs(m[2] - 2 * m[1] + m[0]) < 0.01 * std::abs(m[1] - m[0]));
}

TEST_CASE("string length change under a fifth order perturbation") {
    // h_b - h = b x^5 changes L(0, t) by (n-2)(n-3)/(12(n+1)) b t^6 = b t^6 / 12
    const double b = 1e-2;
    GraphJet base{0.0, {0.0, 0.0, 1.0}};
    JetStrings s0(base, kFlat), s1(quintic(120.0 * b), kFlat);
    for (double t : {0.02, 0.01, 0.005}) {
        CAPTURE(t);
        CHECK(s1.forward_difference(s0, t) / (b * std::pow(t, 6)) == doctest::Approx(1.0 / 12.0).epsilon(0.03));
    }
    // Lambda changes by twice that, matching sigma_5 b5 = 120 b / 720
    CHECK(lambda_taylor(quintic(120.0 * b), kFlat, 6).coefficient(6) == doctest::Approx(b / 6.0).epsilon(0.02));
}

TEST_CASE("even order perturbations leave the next coefficient unchanged") {
    // n = 4 on y = x^2/2 + x^5/120: the reflection x -> -x forces Lambda_6 to
    // depend on b4 only through b3, which is zero here
    LambdaTaylor a = lambda_taylor(quintic(1.0), kFlat, 7);
    GraphJet p = quintic(1.0);
    p.b[4] = 2.0;
    LambdaTaylor b = lambda_taylor(p, kFlat, 7);
    CHECK(std::abs(b.coefficient(6) - a.coefficient(6)) < 3 * (a.error_of(6) + b.error_of(6)) + 1e-12);
    CHECK(std::abs(b.coefficient(6) - a.coefficient(6)) < 1e-6 * a.coefficient(6));
    // ... while an n = 5 perturbation of the same size moves it by sigma_5 * 2
    GraphJet r = quintic(3.0);
    CHECK(lambda_taylor(r, kFlat, 6).coefficient(6) - a.coefficient(6) ==
          doctest::Approx(2.0 / 720.0).epsilon(0.02));

    // a general jet: b4 moves Lambda_6 but leaves Lambda_5 at zero
    GraphJet g{0.0, {0.0, 0.2, 1.3, 0.5, 0.0, 0.7}}, h = g;
    h.b[4] = 1.0;
    LambdaTaylor lg = lambda_taylor(g, kFlat, 6), lh = lambda_taylor(h, kFlat, 6);
    CHECK(std::abs(lg.coefficient(5)) < 1e-9);
    CHECK(std::abs(lh.coefficient(5)) < 1e-9);
}

TEST_CASE("Lambda_6 depends on the metric only through its 5-jet") {
    GraphJet g{0.0, {0.0, 0.0, 1.0, 0.3, 0.2, 0.5}};
    LambdaTaylor flat = lambda_taylor(g, kFlat, 7);
    for (double eps : {0.1, 1.0}) {
        CAPTURE(eps);
        LambdaTaylor pert = lambda_taylor(g, ChartMetric{ChartMetric::Kind::perturbed, eps}, 7);
        CHECK(std::abs(pert.coefficient(6) - flat.coefficient(6)) < 3 * (pert.error_of(6) + flat.error_of(6)));
        // the perturbation is visible one order higher
        CHECK(std::abs(pert.coefficient(7) - flat.coefficient(7)) > 0.1 * eps * 1e-6);
    }
}

TEST_CASE("Lambda_6 ignores the continuation beyond the 5-jet") {
    GraphJet g{0.1, {0.02, 0.3, 1.4, 0.5, -0.7, 0.9}}, h = g;
    h.b.push_back(4.0);  // b6
    h.b.push_back(-3.0);
    LambdaTaylor lg = lambda_taylor(g, kFlat, 6), lh = lambda_taylor(h, kFlat, 6);
    CHECK(std::abs(lh.coefficient(6) - lg.coefficient(6)) < 3 * (lg.error_of(6) + lh.error_of(6)) + 1e-12);
}

TEST_CASE("solve_b5") {
    B5Solution c = solve_b5(Jet4{0.0, {0.0, 0.0, 1.0, 0.0, 3.0}}, kFlat);
    CHECK(std::abs(c.b5) < 1e-9);
    CHECK(c.slope == doctest::Approx(c.expected_slope).epsilon(0.01));
    B5Solution v = solve_b5(ellipse_jet(0.0), kFlat);
    CHECK(std::abs(v.b5) < 1e-9);
    for (double x : {0.5, -0.8}) {
        CAPTURE(x);
        B5Solution e = solve_b5(ellipse_jet(x), kFlat);
        CHECK(e.b5 == doctest::Approx(ellipse_b5(x)).epsilon(1e-3));
    }
    for (const char* m : {"sphere", "hyperbolic"}) {
        B5Solution s = solve_b5(Jet4{0.1, {0.05, 0.2, 1.2, 0.3, 0.1}}, ChartMetric::parse(m));
        CHECK(s.slope == doctest::Approx(s.expected_slope).epsilon(0.01));
    }
    CHECK_THROWS_AS(solve_b5(Jet4{0.0, {0.0, 0.0, -1.0, 0.0, 0.0}}, kFlat), ConvexityError);
}

TEST_CASE("metric specs") {
    CHECK(ChartMetric::parse("perturbed:eps=0.5").epsilon == 0.5);
    CHECK(ChartMetric::parse("hyperbolic").name() == "hyperbolic");
    CHECK_THROWS_AS(ChartMetric::parse("perturbed:eps=x"), InputError);
    CHECK_THROWS_AS(ChartMetric::parse("torus"), InputError);
    // the sphere and hyperbolic charts have curvature cot r and coth r on circles
    // about the origin of chart radius 2 tan(r/2) and 2 tanh(r/2)
    const double r = 0.4, xs = 2 * std::tan(r / 2), xh = 2 * std::tanh(r / 2);
    CHECK(jet_curvature(GraphJet{0.0, {-xs, 0.0, 1.0 / xs}}, ChartMetric::parse("sphere")) ==
          doctest::Approx(1.0 / std::tan(r)).epsilon(1e-12));
    CHECK(jet_curvature(GraphJet{0.0, {-xh, 0.0, 1.0 / xh}}, ChartMetric::parse("hyperbolic")) ==
          doctest::Approx(1.0 / std::tanh(r)).epsilon(1e-12));
}

TEST_CASE("the 4-jet ODE rebuilds conics") {
    JetCurve c = integrate_jet_ode(Jet4{0.0, {0.0, 0.0, 1.0, 0.0, 3.0}}, kFlat, 0.1, 0.01);
    REQUIRE(c.complete);
    REQUIRE(c.samples.size() == 21);
    for (const JetSample& s : c.samples) CHECK(std::abs(s.b[0] - circle_y(s.x)) < 1e-5);
    CHECK(std::abs(c.y(0.055) - circle_y(0.055)) < 1e-5);

    for (double x0 : {0.0, 0.5}) {
        CAPTURE(x0);
        JetCurve e = integrate_jet_ode(ellipse_jet(x0), kFlat, 0.1, 0.01);
        REQUIRE(e.complete);
        for (const JetSample& s : e.samples) CHECK(std::abs(s.b[0] - ellipse_graph<0>(s.x, 2, 1).value()) < 1e-5);
    }

    // two 4-jets of the same ellipse agree where their reconstructions overlap
    JetCurve a = integrate_jet_ode(ellipse_jet(0.3), kFlat, 0.1, 0.01);
    JetCurve b = integrate_jet_ode(ellipse_jet(0.4), kFlat, 0.1, 0.01);
    for (int i = 0; i <= 8; ++i) CHECK(std::abs(a.y(0.3 + 0.0125 * i) - b.y(0.3 + 0.0125 * i)) < 1e-5);
}

TEST_CASE("the 4-jet ODE runs on the numerically integrated perturbed chart") {
    // eps = 0 takes the geodesic-shooting path through a flat metric, so the
    // unit circle must come back
    JetCurve flat = integrate_jet_ode(Jet4{0.0, {0.0, 0.0, 1.0, 0.0, 3.0}}, ChartMetric::parse("perturbed:eps=0"), 0.1, 0.01);
    REQUIRE(flat.complete);
    for (const JetSample& s : flat.samples) CHECK(std::abs(s.b[0] - (1.0 - std::sqrt(1.0 - s.x * s.x))) < 1e-9);
    // a genuine perturbation completes the run away from the origin as well
    JetCurve bent = integrate_jet_ode(Jet4{0.0, {0.0, 0.0, 1.0, 0.0, 3.0}}, ChartMetric::parse("perturbed:eps=0.5"), 0.1, 0.01);
    CHECK(bent.complete);
    CHECK(bent.samples.size() == flat.samples.size());
}

TEST_CASE("the 4-jet ODE stops when convexity is lost") {
    // curvature 1 - 10 x to first order: the forward run dies near the inflection
    JetCurve j = integrate_jet_ode(Jet4{0.0, {0.0, 0.0, 1.0, -10.0, 0.0}}, kFlat, 0.15, 0.01);
    CHECK_FALSE(j.complete);
    CHECK(j.stop_reason.find("forward") != std::string::npos);
    REQUIRE_FALSE(j.samples.empty());
    CHECK(j.samples.back().x < 0.15);
    CHECK(j.samples.back().x > 0.05);
    CHECK(j.samples.front().x == doctest::Approx(-0.15));
    CHECK_THROWS_AS(integrate_jet_ode(Jet4{0.0, {0.0, 0.0, -1.0, 0.0, 0.0}}, kFlat, 0.1, 0.01), ConvexityError);
}

TEST_CASE("conic oracle for reconstructions") {
    // exact circle samples have zero deviation; shifting them is detected
    Jet4 c{0.0, {0.0, 0.0, 1.0, 0.0, 3.0}};
    JetCurve exact;
    for (int i = -4; i <= 4; ++i) {
        double x = 0.025 * i;
        exact.samples.push_back({x, {circle_y(x), x / std::sqrt(1 - x * x), 0, 0, 0}, 0.0});
    }
    CHECK(conic_deviation(c, kFlat, exact) < 1e-14);
    exact.samples[2].b[0] += 1e-6;
    CHECK(conic_deviation(c, kFlat, exact) == doctest::Approx(1e-6).epsilon(0.01));

    // geodesic circles about the chart origin on the sphere and hyperbolic charts
    for (const char* m : {"sphere", "hyperbolic"}) {
        CAPTURE(m);
        ChartMetric metric = ChartMetric::parse(m);
        JetCurve j = integrate_jet_ode(Jet4{0.0, {-0.5, 0.0, 2.0, 0.0, 24.0}}, metric, 0.05, 0.01);
        REQUIRE(j.complete);
        // the 4-jet of the chart circle of radius 1/2: y = -sqrt(1/4 - x^2)
        for (const JetSample& s : j.samples) CHECK(std::abs(s.b[0] + std::sqrt(0.25 - s.x * s.x)) < 1e-5);
        CHECK(conic_deviation(Jet4{0.0, {-0.5, 0.0, 2.0, 0.0, 24.0}}, metric, j) < 1e-6);
    }
    CHECK_THROWS_AS(conic_deviation(c, ChartMetric{ChartMetric::Kind::perturbed, 1.0}, exact), UnsupportedKindError);
}
