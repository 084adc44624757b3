#include <doctest.h>

#include <cmath>
#include <random>

#include "caustica/outer_billiards.hpp"

using namespace caustica;

namespace {

double segment_area(double d) { return std::acos(d) - d * std::sqrt(1.0 - d * d); }

Vec3 on_sphere(double polar, double azimuth) {
    return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

}  // namespace

TEST_CASE("outer map of the circle is a rotation") {
    ConvexCurve c = make_circle(1.0);
    Vec3 t = outer_map(c, Vec3(std::sqrt(2.0), 0, 0));
    CHECK((t - Vec3(0, std::sqrt(2.0), 0)).norm() < 1e-10);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ang(0.0, 2 * M_PI), rad(1.05, 3.0);
    for (int i = 0; i < 10; ++i) {
        double th = ang(rng), d = rad(rng);
        Vec3 a(d * std::cos(th), d * std::sin(th), 0.0);
        OuterStep st = outer_step(c, a);
        CHECK(st.image.norm() == doctest::Approx(d).epsilon(1e-12));
        double turn = std::remainder(std::atan2(st.image.y(), st.image.x()) - th, 2 * M_PI);
        CHECK(turn == doctest::Approx(2.0 * std::acos(1.0 / d)).epsilon(1e-9));
        CHECK(std::abs(c.surface().distance(st.tangency, st.image) - st.distance) < 1e-10);
    }
    CHECK_THROWS_AS(outer_map(c, Vec3(0.3, 0.2, 0)), DomainError);
}

TEST_CASE("outer map on the sphere") {
    const double r = 0.5, d = 0.8;
    ConvexCurve c = make_geodesic_circle(Surface::sphere(), r);
    const Surface& s = c.surface();
    const Vec3 pole(0, 0, 1);
    Vec3 a = on_sphere(d, 0.3);
    OuterStep st = outer_step(c, a);
    CHECK(std::abs(s.distance(a, st.tangency) - s.distance(st.tangency, st.image)) < 1e-10);
    CHECK(s.distance(pole, st.image) == doctest::Approx(d).epsilon(1e-10));
    // right triangle pole-B-A: cos(angle at the pole) = tan r / tan d
    double turn = std::atan2(st.image.y(), st.image.x()) - 0.3;
    CHECK(turn == doctest::Approx(2.0 * std::acos(std::tan(r) / std::tan(d))).epsilon(1e-9));
}

TEST_CASE("area cut of the unit disk") {
    ConvexCurve c = make_circle(1.0);
    CHECK(enclosed_area(c) == doctest::Approx(M_PI).epsilon(1e-13));
    CHECK(area_cut(c, {Vec3(-2, 0, 0), Vec3(1, 0, 0)}) == doctest::Approx(M_PI / 2).epsilon(1e-12));
    CHECK(area_cut(c, {Vec3(0.1, 0.1, 0), Vec3(1, 1, 0).normalized()}) == doctest::Approx(M_PI / 2).epsilon(1e-12));

    UnitTangent g{Vec3(-2, -0.5, 0), Vec3(1, 0, 0)};
    double minor = area_cut(c, g);
    CHECK(minor == doctest::Approx(0.614185).epsilon(1e-6));
    CHECK(minor == doctest::Approx(segment_area(0.5)).epsilon(1e-13));
    double major = area_cut(c, {Vec3(2, -0.5, 0), Vec3(-1, 0, 0)});
    CHECK(std::abs(minor + major - M_PI) < 1e-9);

    CHECK_THROWS_AS(area_cut(c, {Vec3(0, 2, 0), Vec3(1, 0, 0)}), GeometryError);
}

TEST_CASE("area cut on curved surfaces") {
    const double r = 0.7;
    ConvexCurve sc = make_geodesic_circle(Surface::sphere(), r);
    CHECK(enclosed_area(sc) == doctest::Approx(2 * M_PI * (1 - std::cos(r))).epsilon(1e-12));
    UnitTangent eq = sc.surface().unit(Vec3(0, 0, 1), Vec3(1, 0, 0));
    CHECK(area_cut(sc, eq) == doctest::Approx(M_PI * (1 - std::cos(r))).epsilon(1e-10));
    // complement sum with an off-center chord
    UnitTangent g = sc.surface().flow(sc.surface().unit(Vec3(0, 0, 1), Vec3(0, 1, 0)), 0.3);
    g = sc.surface().unit(g.point, sc.surface().left_normal(g.point, g.vector));
    UnitTangent back{g.point, -g.vector};
    CHECK(std::abs(area_cut(sc, g) + area_cut(sc, back) - enclosed_area(sc)) < 1e-9);

    ConvexCurve hc = make_geodesic_circle(Surface::hyperbolic(), r);
    CHECK(enclosed_area(hc) == doctest::Approx(2 * M_PI * (std::cosh(r) - 1)).epsilon(1e-12));
    UnitTangent heq = hc.surface().unit(Vec3(0, 0, 0), Vec3(1, 0, 0));
    CHECK(area_cut(hc, heq) == doctest::Approx(M_PI * (std::cosh(r) - 1)).epsilon(1e-10));

    // a constant metric 4 I scales areas by 4 and exercises the chart quadrature
    Surface chart = Surface::general_chart([](const Vec2&) { return Mat2(4.0 * Mat2::Identity()); });
    ConvexCurve cc(chart, make_model(curves::Ellipse{1.0, 1.0}, 0.0, 2 * M_PI, true, "unit circle"));
    CHECK(enclosed_area(cc) == doctest::Approx(4 * M_PI).epsilon(1e-10));
    UnitTangent cg = chart.unit(Vec3(-0.9, -0.5, 0), Vec3(1, 0, 0));
    CHECK(area_cut(cc, cg) == doctest::Approx(4 * segment_area(0.5)).epsilon(1e-8));
}

TEST_CASE("area construction of the circle") {
    ConvexCurve c = make_circle(1.0);
    AreaOptions o;
    o.samples = 32;
    const double r = 0.5;
    AreaCurve g = area_construction(c, segment_area(r), o);
    CHECK(g.p == doctest::Approx(0.614185).epsilon(1e-6));
    CHECK_FALSE(g.degenerate);
    CHECK(g.max_area_residual < 1e-9);
    CHECK(g.max_bisection_residual < 1e-7);
    for (const auto& a : g.samples) CHECK(a.envelope.norm() == doctest::Approx(r).epsilon(1e-8));

    // gamma_p shrinks to the center as p approaches half the disk
    double last = 1.0;
    for (double d : {0.2, 0.05, 0.01}) {
        AreaCurve gd = area_construction(c, segment_area(d), o);
        CHECK(gd.samples[5].envelope.norm() < last);
        last = gd.samples[5].envelope.norm();
    }
    CHECK(last < 0.011);
    CHECK_THROWS_AS(area_construction(c, 2.0, o), DomainError);
}

TEST_CASE("area construction of the ellipse") {
    ConvexCurve e = make_ellipse(2.0, 1.0);
    AreaCurve g = area_construction(e, 1e-3);
    CHECK_FALSE(g.degenerate);
    CHECK(g.max_area_residual < 1e-9);
    CHECK(g.max_bisection_residual < 1e-7);
    HomothetyFit fit = homothety_fit(e, g);
    CHECK(fit.lambda < 1.0);
    CHECK(fit.lambda > 0.9);
    CHECK(fit.max_residual < 1e-6);

    // Gamma is invariant under the outer map about gamma_p, which is area preserving
    ConvexCurve gp = area_curve_as_curve(e, g);
    for (int i = 0; i < 8; ++i) {
        const AreaSample& a = g.samples[i * 29 % 256];
        Vec3 img = outer_map(gp, e.point(a.s1));
        CHECK((img - e.point(a.s2)).norm() < 1e-7);
    }
    auto f = [&](const Vec2& q) { return outer_map(gp, Vec3(q.x(), q.y(), 0.0)).head<2>().eval(); };
    for (Vec2 q : {Vec2(2.3, 0.4), Vec2(-0.5, 1.4), Vec2(0.2, -3.0)}) {
        const double h = 1e-4;
        Vec2 dx = (f(q + Vec2(h, 0)) - f(q - Vec2(h, 0))) / (2 * h);
        Vec2 dy = (f(q + Vec2(0, h)) - f(q - Vec2(0, h))) / (2 * h);
        CHECK(dx.x() * dy.y() - dx.y() * dy.x() == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("area Poritsky property") {
    PoritskyReport rc = area_poritsky_check(make_circle(1.0), {1e-3, 2e-3}, 16);
    for (double d : rc.max_deviation) CHECK(d < 1e-12);

    ConvexCurve e = make_ellipse(2.0, 1.0);
    PoritskyReport re = area_poritsky_check(e, {1e-3, 2e-3}, 64);
    CHECK(re.pass);
    for (double d : re.max_deviation) CHECK(d < 1e-5);

    PoritskyReport rq = area_poritsky_check(make_quartic_oval(), {1e-3, 2e-3}, 64);
    CHECK_FALSE(rq.pass);
    for (double d : rq.max_deviation) CHECK(d > 1e-4);
}

TEST_CASE("chord angle ratio") {
    ConvexCurve c = make_circle(1.0);
    CHECK(chord_angle_ratio(c, 0.3, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(chord_angle_ratio(c, 0.3, 0.3), DomainError);

    ConvexCurve e = make_ellipse(2.0, 1.0);
    double ab = chord_angle_ratio(e, 0.2, 1.5), bc = chord_angle_ratio(e, 1.5, 4.0), ca = chord_angle_ratio(e, 4.0, 0.2);
    CHECK(std::abs(ab * bc * ca - 1.0) < 1e-8);
    CHECK(std::abs(ab - 1.0) > 1e-3);

    AreaPoritskyParameter t(e, 5e-4);
    for (auto [sa, sb] : {std::pair{0.2, 1.5}, std::pair{1.0, 1.3}, std::pair{3.0, 7.5}}) {
        double r = chord_angle_ratio(e, sa, sb);
        CHECK(r == doctest::Approx(t.dt_ds(sa) / t.dt_ds(sb)).epsilon(1e-4));
    }
}
