#include <doctest.h>

#include <cmath>

#include "caustica/billiard_maps.hpp"
#include "caustica/string_construction.hpp"

using namespace caustica;

namespace {

double wrap_diff(double a, double b, double period) {
    double d = std::remainder(a - b, period);
    return std::abs(d);
}

}  // namespace

TEST_CASE("phase coordinates") {
    for (double phi : {1e-6, 0.1, 1.0, 3.0}) CHECK(phi_of_y(y_of_phi(phi)) == doctest::Approx(phi).epsilon(1e-14));
    CHECK(y_of_phi(0.1) == doctest::Approx(1.0 - std::cos(0.1)).epsilon(1e-13));
    CHECK(std::abs(y_of_phi(0.1) - 4.99583e-3) < 1e-8);
    CHECK_THROWS_AS(phi_of_y(2.5), DomainError);
}

TEST_CASE("circle billiard is a rotation") {
    ConvexCurve c = make_circle(1.0);
    for (double phi : {0.05, 0.7, 2.0}) {
        PhasePoint q = billiard_step(c, {0.3, phi});
        CHECK(q.s - 0.3 == doctest::Approx(2 * phi).epsilon(1e-12));
        CHECK(q.phi == doctest::Approx(phi).epsilon(1e-12));
    }
    WeaklyBilliardMap f = billiard_map_sy(c);
    double y = 1.0 - std::cos(0.1);
    auto [s1, y1] = f.forward(0.3, y);
    CHECK(s1 - 0.3 == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(y1 == doctest::Approx(y).epsilon(1e-12));
    // s-advance / sqrt(y) -> 2 sqrt(2) / kappa
    CHECK(0.2 / std::sqrt(y) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-3));
    auto [s2, y2] = f.forward(0.3, 1e-8);
    CHECK((s2 - 0.3) / std::sqrt(1e-8) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-8));
    CHECK(f.forward(0.3, 0.0).first == 0.3);
}

TEST_CASE("reflection") {
    ConvexCurve c = make_circle(1.0);
    // chord from angle 0 at phi = 0.4 to the tangent, reflected at angle 0.8
    UnitTangent g{Vec3(1, 0, 0), Vec3(std::cos(M_PI / 2 + 0.4), std::sin(M_PI / 2 + 0.4), 0)};
    UnitTangent r = reflect(c, g);
    CHECK((r.point - Vec3(std::cos(0.8), std::sin(0.8), 0)).norm() < 1e-12);
    Vec3 t(-std::sin(0.8), std::cos(0.8), 0);
    Vec3 in = (r.point - g.point).normalized();
    Vec3 nrm_hit = -r.point;
    CHECK(r.vector.dot(t) == doctest::Approx(in.dot(t)).epsilon(1e-12));
    CHECK(r.vector.dot(nrm_hit) == doctest::Approx(-in.dot(nrm_hit)).epsilon(1e-12));
    CHECK(r.vector.dot(t) == doctest::Approx(std::cos(0.4)).epsilon(1e-12));
    // normal incidence reverses the geodesic
    UnitTangent n = reflect(c, {Vec3(0, 0, 0), Vec3(1, 0, 0)});
    CHECK((n.vector - Vec3(-1, 0, 0)).norm() < 1e-12);
    CHECK_THROWS_AS(reflect(c, {Vec3(2, 0, 0), Vec3(0, 1, 0)}), GeometryError);

    // sphere: equal angles with the tangent before and after
    ConvexCurve sc = make_geodesic_circle(Surface::sphere(), 0.6);
    const Surface& s = sc.surface();
    UnitTangent start = sc.tangent_geodesic(0.2);
    Vec3 nrm = s.left_normal(start.point, start.vector);
    UnitTangent chord{start.point, std::cos(0.5) * start.vector + std::sin(0.5) * nrm};
    UnitTangent out = reflect(sc, chord);
    // tangent of the circle about the pole: e_z x P
    Vec3 tan_hit = Vec3(0, 0, 1).cross(out.point).normalized();
    Vec3 incoming = -s.toward(out.point, chord.point).vector;
    double a_in = s.angle(out.point, incoming, tan_hit);
    double a_out = s.angle(out.point, out.vector, tan_hit);
    CHECK(std::abs(a_in - a_out) < 1e-9);
}

TEST_CASE("billiard map factors through an involution") {
    ConvexCurve e = make_ellipse(2.0, 1.0);
    const double len = e.length();
    for (double s : {0.0, 0.9, 3.3}) {
        for (double phi : {0.01, 0.4, 1.5, 2.8}) {
            PhasePoint b1 = billiard_beta(e, {s, phi});
            PhasePoint b2 = billiard_beta(e, b1);
            CHECK(wrap_diff(b2.s, s, len) < 1e-8);
            CHECK(std::abs(b2.phi - phi) < 1e-8);
            PhasePoint d = billiard_step(e, {s, phi});
            CHECK(d.s == doctest::Approx(b1.s).epsilon(1e-14));
            CHECK(d.phi == doctest::Approx(M_PI - b1.phi).epsilon(1e-14));
        }
    }
}

TEST_CASE("billiard-like advance 2 phi / kappa") {
    ConvexCurve e = make_ellipse(2.0, 1.0);
    const double s = 0.7, k = e.geodesic_curvature(s);
    double err2 = std::abs((billiard_step(e, {s, 1e-2}).s - s) / (2e-2 / k) - 1.0);
    double err3 = std::abs((billiard_step(e, {s, 1e-3}).s - s) / (2e-3 / k) - 1.0);
    CHECK(err2 < 0.05);
    CHECK(err3 < 0.5 * err2);
    CHECK(err3 / err2 == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("area preservation in (s, y)") {
    ConvexCurve e = make_ellipse(2.0, 1.0);
    WeaklyBilliardMap f = billiard_map_sy(e);
    CHECK(jacobian(f, 0.3, 1e-3).det() == doctest::Approx(1.0).epsilon(1e-6));
    for (int i = 0; i < 3; ++i)
        for (double y : {1e-4, 1e-2}) CHECK(std::abs(jacobian(f, e.length() * i / 3.0, y).det() - 1.0) < 1e-6);
    Jacobian2 t = jacobian(translation_map(), 0.2, 0.04);
    CHECK(t.det() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Lazutkin chart") {
    LazutkinChart circle([](double) { return 2 * std::sqrt(2.0); });
    auto [X, Y] = circle.forward(0.4, 0.005);
    CHECK(X == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(Y == doctest::Approx(0.01).epsilon(1e-13));
    auto [x, y] = circle.inverse(0.2, 0.01);
    CHECK(x == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(y == doctest::Approx(0.005).epsilon(1e-12));

    LazutkinChart id([](double) { return 1.0; });
    CHECK(id.X(0.7) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(id.Y(0.7, 0.3) == doctest::Approx(0.3).epsilon(1e-14));

    ConvexCurve e = make_ellipse(2.0, 1.0);
    LazutkinChart quad([&](double s) { return 2 * std::sqrt(2.0) / e.geodesic_curvature(s); }, e.s0());
    LazutkinChart tab = LazutkinChart::for_billiard(e);
    for (double s : {0.2, 1.5, 4.0, 8.0}) {
        CHECK(std::abs(quad.X(s) - tab.X(s)) < 1e-8);
        CHECK(std::abs(tab.X(s) - std::pow(2 * std::sqrt(2.0), -2.0 / 3.0) * e.lazutkin_parameter(s)) < 1e-13);
    }
    CHECK(quad.x_of(quad.X(1.5)) == doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("normal form in Lazutkin coordinates") {
    ConvexCurve c = make_circle(1.0);
    NormalFormReport rc = normal_form_check(billiard_map_sy(c), LazutkinChart::for_billiard(c), 0.5, 1e-6, 1e-3);
    CHECK(std::abs(rc.slope - 0.5) < 1e-4);
    CHECK(std::abs(rc.coefficient - 1.0) < 1e-3);
    for (std::size_t i = 0; i < rc.Y.size(); ++i) CHECK(std::abs(rc.dY[i]) < 1e-9 * rc.Y[i]);

    LazutkinChart id([](double) { return 1.0; });
    NormalFormReport rt = normal_form_check(translation_map(), id, 0.0, 1e-6, 1e-3);
    CHECK(rt.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rt.coefficient == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rt.max_dY_ratio == 0.0);

    ConvexCurve e = make_ellipse(2.0, 1.0);
    WeaklyBilliardMap f = billiard_map_sy(e);
    LazutkinChart ch = LazutkinChart::for_billiard(e);
    for (double x : {0.3, 1.0, 2.0}) {
        NormalFormReport r = normal_form_check(f, ch, x, 1e-6, 1e-3);
        CHECK(std::abs(r.slope - 0.5) < 0.01);
        CHECK(std::abs(r.coefficient - 1.0) < 0.02);
        // Y + o(Y^{3/2})
        CHECK(r.dY_exponent > 1.5);
        // refined f2 coefficient -(2/3) w'
        CHECK(r.f2_coefficient == doctest::Approx(r.f2_predicted).epsilon(1e-2));
    }
}

TEST_CASE("orbits near the boundary") {
    ConvexCurve c = make_circle(1.0);
    WeaklyBilliardMap fc = billiard_map_sy(c);
    LazutkinChart cc = LazutkinChart::for_billiard(c);
    OrbitRecord o = orbit(fc, cc, 0.0, 1e-4, 0.5);
    double step = o.X[1] - o.X[0];
    CHECK(step == doctest::Approx(1e-2).epsilon(1e-4));
    CHECK(o.m * step <= 0.5 + 1e-12);
    CHECK(o.m * step >= 0.5 - step);
    PlogStats sc = plog_bounds_check(o);
    CHECK(sc.alpha < 1e-10);
    CHECK(sc.beta < 1e-4);

    OrbitRecord fixed = orbit(fc, cc, 0.0, 0.0, 0.5, 1000);
    CHECK(fixed.capped);
    CHECK(fixed.m == 1000);

    ConvexCurve e = make_ellipse(2.0, 1.0);
    WeaklyBilliardMap f = billiard_map_sy(e);
    LazutkinChart ch = LazutkinChart::for_billiard(e);
    double last_alpha = HUGE_VAL;
    for (double y0 : {1e-4, 1e-5, 1e-6}) {
        OrbitRecord r = orbit(f, ch, -0.5, y0, 0.5);
        for (std::size_t j = 1; j < r.X.size(); ++j) CHECK(r.X[j] > r.X[j - 1]);
        PlogStats st = plog_bounds_check(r);
        CHECK(st.alpha < last_alpha);
        last_alpha = st.alpha;
        CHECK(plog_bands_hold(r, st.beta + 1e-15));
        if (y0 == 1e-6) {
            CHECK(st.beta < 0.1);
            CHECK(plog_bands_hold(r, 0.1));
        }
    }
}

TEST_CASE("string curves are billiard caustics") {
    ConvexCurve e = make_ellipse(2.0, 1.0);
    // trigonometric interpolation of Gamma_p converges fast: 64 anchors leave an
    // angular error near 1e-5, 256 anchors near 1e-12
    StringOptions opts;
    opts.samples = 256;
    StringCurve g = string_curve(e, 1e-3, StringMethod::pair_rootfind, opts);
    ConvexCurve table = string_curve_as_curve(e, g);
    const Surface& s = e.surface();
    for (double a : {0.1, 1.7, 4.0}) {
        UnitTangent in = e.tangent_geodesic(a);
        UnitTangent out = reflect(table, in);
        auto [sa, sb] = e.tangency_points(out.point);
        CHECK(wrap_diff(sa, a, e.length()) < 1e-6);
        Vec3 toward_b = s.toward(out.point, e.point(sb)).vector;
        CHECK(s.angle(out.point, out.vector, toward_b) < 1e-7);
    }
}
