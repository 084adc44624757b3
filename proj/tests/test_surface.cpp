#include <doctest.h>

#include <cmath>
#include <complex>

#include "caustica/surface.hpp"

using namespace caustica;

namespace {

Vec3 disk(double x, double y) { return {x, y, 0.0}; }

// Moebius automorphism of the disk z -> e^{i t} (z - a) / (1 - conj(a) z), applied
// to points and (by its complex derivative) to tangent vectors.
struct Mobius {
    std::complex<double> a;
    double t;
    std::complex<double> map(std::complex<double> z) const {
        return std::polar(1.0, t) * (z - a) / (1.0 - std::conj(a) * z);
    }
    std::complex<double> deriv(std::complex<double> z) const {
        std::complex<double> d = 1.0 - std::conj(a) * z;
        return std::polar(1.0, t) * (1.0 - std::norm(a)) / (d * d);
    }
    Vec3 point(const Vec3& p) const {
        auto w = map({p.x(), p.y()});
        return {w.real(), w.imag(), 0.0};
    }
    Vec3 vector(const Vec3& p, const Vec3& v) const {
        auto w = deriv({p.x(), p.y()}) * std::complex<double>(v.x(), v.y());
        return {w.real(), w.imag(), 0.0};
    }
};

// Inverse stereographic projection from the south pole: chart (x, y) -> unit sphere.
Vec3 from_stereo(const Vec3& p) {
    double r2 = p.x() * p.x() + p.y() * p.y();
    return Vec3(2.0 * p.x(), 2.0 * p.y(), 1.0 - r2) / (1.0 + r2);
}

}  // namespace

TEST_CASE("geodesic flow closed forms") {
    Surface sph = Surface::sphere();
    UnitTangent u = sph.flow({Vec3::UnitZ(), Vec3::UnitX()}, M_PI / 2);
    CHECK((u.point - Vec3::UnitX()).norm() < 1e-15);
    CHECK((u.vector + Vec3::UnitZ()).norm() < 1e-15);

    Surface hyp = Surface::hyperbolic();
    UnitTangent h = hyp.flow(hyp.unit(disk(0, 0), Vec3::UnitX()), std::log(3.0));
    CHECK(h.point.norm() == doctest::Approx(0.5).epsilon(1e-14));

    Surface euc = Surface::euclidean();
    UnitTangent e = euc.flow({disk(0, 0), Vec3::UnitX()}, 2.0);
    CHECK((e.point - disk(2, 0)).norm() < 1e-15);
    CHECK((e.vector - Vec3::UnitX()).norm() < 1e-15);
}

TEST_CASE("distances") {
    CHECK(Surface::sphere().distance(Vec3::UnitZ(), Vec3::UnitX()) == doctest::Approx(M_PI / 2));
    CHECK(Surface::hyperbolic().distance(disk(0, 0), disk(0.5, 0)) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(Surface::euclidean().distance(disk(0, 0), disk(3, 4)) == doctest::Approx(5.0));
    Surface hyp = Surface::hyperbolic();
    Vec3 p = disk(0.3, -0.2), q = disk(-0.1, 0.6);
    CHECK(hyp.distance(p, q) == doctest::Approx(hyp.distance(q, p)).epsilon(1e-14));
    // Disk distance closed form: acosh(1 + 2|p-q|^2 / ((1-|p|^2)(1-|q|^2)))
    double ref = std::acosh(1.0 + 2.0 * (p - q).squaredNorm() / ((1.0 - p.squaredNorm()) * (1.0 - q.squaredNorm())));
    CHECK(hyp.distance(p, q) == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("angles") {
    Surface euc = Surface::euclidean();
    CHECK(euc.angle(disk(0, 0), Vec3::UnitX(), Vec3::UnitY()) == doctest::Approx(M_PI / 2));
    CHECK(euc.angle(disk(0, 0), Vec3::UnitX(), Vec3::UnitX()) == doctest::Approx(0.0));
    Surface g = make_surface("general:diag=1,4");
    CHECK(g.angle(disk(0.1, 0.2), disk(1, 0), disk(1, 1)) == doctest::Approx(std::acos(1.0 / std::sqrt(5.0))).epsilon(1e-12));
    CHECK(g.angle(disk(0.1, 0.2), disk(1, 0), disk(1, 1)) == doctest::Approx(1.107149).epsilon(1e-6));
    CHECK_THROWS_AS(euc.angle(disk(0, 0), Vec3::Zero(), Vec3::UnitX()), InputError);
}

TEST_CASE("psi closed forms") {
    CHECK(psi(Surface::euclidean(), 2.0) == doctest::Approx(2.0));
    CHECK(psi(Surface::sphere(), M_PI / 2) == doctest::Approx(1.0));
    CHECK(psi(Surface::hyperbolic(), 1.0) == doctest::Approx(1.175201).epsilon(1e-6));
    CHECK_THROWS_AS(psi(make_surface("general:identity"), 1.0), UnsupportedKindError);
}

TEST_CASE("big psi by finite differences") {
    Surface euc = Surface::euclidean();
    CHECK(big_psi(euc, {disk(0.3, 0.1), Vec3(0.6, 0.8, 0)}, 0.7) == doctest::Approx(1.0).epsilon(1e-9));
    Surface sph = Surface::sphere();
    CHECK(big_psi(sph, {Vec3::UnitZ(), Vec3::UnitX()}, M_PI / 2) == doctest::Approx(2.0 / M_PI).epsilon(1e-9));
    Surface flat = make_surface("general:identity");
    CHECK(big_psi(flat, {disk(0, 0), Vec3::UnitX()}, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(big_psi(euc, {disk(0, 0), Vec3::UnitX()}, 1e-3), IllConditionedError);
    for (double r : {0.1, 0.5, 1.0}) {
        Surface hyp = Surface::hyperbolic();
        UnitTangent v = hyp.unit(disk(0.2, -0.1), Vec3(1, 2, 0));
        CHECK(r * big_psi(hyp, v, r) == doctest::Approx(psi(hyp, r)).epsilon(1e-5));
        CHECK(r * big_psi(sph, sph.unit(Vec3(0.6, 0, 0.8), Vec3::UnitY()), r) == doctest::Approx(psi(sph, r)).epsilon(1e-5));
    }
}

TEST_CASE("circle circumference matches psi") {
    CHECK(circle_circumference(Surface::euclidean(), disk(0, 0), 1.0) == doctest::Approx(2 * M_PI).epsilon(1e-10));
    CHECK(circle_circumference(Surface::sphere(), Vec3::UnitZ(), 0.5) == doctest::Approx(2 * M_PI * std::sin(0.5)).epsilon(1e-9));
    CHECK(circle_circumference(Surface::hyperbolic(), disk(0, 0), 1.0) == doctest::Approx(2 * M_PI * std::sinh(1.0)).epsilon(1e-9));
    for (auto s : {Surface::euclidean(), Surface::sphere(), Surface::hyperbolic()}) {
        Vec3 c = s.kind() == SurfaceKind::sphere ? Vec3(0, 0.6, 0.8) : disk(0.1, 0.3);
        for (double r : {0.1, 0.5, 1.0})
            CHECK(std::abs(circle_circumference(s, c, r) / (2 * M_PI) / psi(s, r) - 1.0) < 1e-6);
    }
}

TEST_CASE("unit speed and flow additivity") {
    Surface stereo = make_surface("general:stereographic");
    Surface hyp = Surface::hyperbolic();
    Surface sph = Surface::sphere();
    UnitTangent g0 = stereo.unit(disk(0.2, 0.1), Vec3(1, 0.3, 0));
    for (double s : {-1.0, 0.3, 1.0}) {
        UnitTangent g = stereo.flow(g0, s);
        CHECK(std::abs(stereo.norm(g.point, g.vector) - 1.0) < 1e-9);
    }
    CHECK((stereo.flow(g0, 0.7).point - stereo.flow(stereo.flow(g0, 0.4), 0.3).point).norm() < 1e-8);
    UnitTangent h0 = hyp.unit(disk(0.2, 0.1), Vec3(1, 0.3, 0));
    CHECK((hyp.flow(h0, 0.7).point - hyp.flow(hyp.flow(h0, 0.4), 0.3).point).norm() < 1e-13);
    CHECK(std::abs(hyp.norm(hyp.flow(h0, 1.0).point, hyp.flow(h0, 1.0).vector) - 1.0) < 1e-12);
    UnitTangent s0 = sph.unit(Vec3(0, 0.6, 0.8), Vec3(1, 0, 0));
    CHECK((sph.flow(s0, 0.7).point - sph.flow(sph.flow(s0, 0.4), 0.3).point).norm() < 1e-14);
}

TEST_CASE("general chart with identity metric agrees with the plane") {
    Surface flat = make_surface("general:identity");
    Surface euc = Surface::euclidean();
    UnitTangent a{disk(0.1, 0.2), Vec3(0.6, 0.8, 0)};
    UnitTangent b{disk(1.0, -0.3), Vec3(0, 1, 0)};
    CHECK((flat.flow(a, 0.9).point - euc.flow(a, 0.9).point).norm() < 1e-8);
    CHECK(std::abs(flat.distance(a.point, b.point) - euc.distance(a.point, b.point)) < 1e-8);
    auto cf = flat.intersect(a, b);
    auto ce = euc.intersect(a, b);
    REQUIRE(cf);
    REQUIRE(ce);
    CHECK((cf->point - ce->point).norm() < 1e-8);
    CHECK(std::abs(cf->time_a - ce->time_a) < 1e-8);
    CHECK(std::abs(flat.side(a, disk(0.5, 1.5)) - euc.side(a, disk(0.5, 1.5))) < 1e-8);
    Vec3 d1(1, 0.5, 0), d2(-0.3, 2, 0);
    CHECK(std::abs(flat.geodesic_curvature(a.point, d1, d2) - euc.geodesic_curvature(a.point, d1, d2)) < 1e-8);
}

TEST_CASE("stereographic chart reproduces spherical distances") {
    Surface stereo = make_surface("general:stereographic");
    Surface sph = Surface::sphere();
    Vec3 p = disk(0.1, -0.2), q = disk(0.4, 0.3);
    CHECK(std::abs(stereo.distance(p, q) - sph.distance(from_stereo(p), from_stereo(q))) < 1e-9);
}

TEST_CASE("finite-difference Christoffel symbols match the analytic disk") {
    Surface num = make_surface("general:poincare");
    Surface hyp = Surface::hyperbolic();
    Vec3 p = disk(0.3, -0.4);
    auto a = num.christoffel(p);
    auto b = hyp.christoffel(p);
    CHECK((a[0] - b[0]).norm() + (a[1] - b[1]).norm() < 1e-8);
}

TEST_CASE("geodesic curvature of circles") {
    Surface hyp = Surface::hyperbolic();
    // Euclidean circle |z| = R in the disk is the metric circle of radius 2 atanh R.
    double R = 0.4, r = 2.0 * std::atanh(R);
    double phi = 0.7;
    Vec3 p(R * std::cos(phi), R * std::sin(phi), 0), d1(-R * std::sin(phi), R * std::cos(phi), 0), d2 = -p;
    CHECK(hyp.geodesic_curvature(p, d1, d2) == doctest::Approx(1.0 / std::tanh(r)).epsilon(1e-13));
    Surface sph = Surface::sphere();
    double th = M_PI / 4;
    Vec3 c(std::sin(th), 0, std::cos(th)), c1(0, std::sin(th), 0), c2(-std::sin(th), 0, 0);
    CHECK(sph.geodesic_curvature(c, c1, c2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("isometry invariance") {
    Surface hyp = Surface::hyperbolic();
    Mobius m{{0.3, -0.2}, 0.8};
    Vec3 p = disk(0.1, 0.5), q = disk(-0.4, 0.2);
    CHECK(std::abs(hyp.distance(p, q) - hyp.distance(m.point(p), m.point(q))) < 1e-9);
    Vec3 u(1, 0.2, 0), v(-0.3, 1, 0);
    CHECK(std::abs(hyp.angle(p, u, v) - hyp.angle(m.point(p), m.vector(p, u), m.vector(p, v))) < 1e-9);
    // flows commute with the isometry
    UnitTangent g = hyp.unit(p, u);
    UnitTangent img{m.point(p), m.vector(p, g.vector)};
    CHECK((m.point(hyp.flow(g, 0.8).point) - hyp.flow(img, 0.8).point).norm() < 1e-9);

    Surface sph = Surface::sphere();
    Eigen::Matrix3d rot = Eigen::AngleAxisd(0.9, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    Vec3 a = Vec3(0.2, 0.3, 0.9).normalized(), b = Vec3(-0.5, 0.1, 0.8).normalized();
    CHECK(std::abs(sph.distance(a, b) - sph.distance(rot * a, rot * b)) < 1e-12);
    Vec3 t1 = sph.project_tangent(a, Vec3(1, 0, 0)), t2 = sph.project_tangent(a, Vec3(0, 1, 0));
    CHECK(std::abs(sph.oriented_angle(a, t1, t2) - sph.oriented_angle(rot * a, rot * t1, rot * t2)) < 1e-12);
}

TEST_CASE("normal charts have a flat 1-jet at the origin") {
    for (auto s : {Surface::euclidean(), Surface::sphere(), Surface::hyperbolic()}) {
        UnitTangent axis = s.kind() == SurfaceKind::sphere ? UnitTangent{Vec3::UnitZ(), Vec3::UnitX()}
                                                           : s.unit(disk(0, 0), Vec3::UnitX());
        Chart c = normal_chart(s, axis);
        CHECK((c.metric(Vec2(0, 0)) - Mat2::Identity()).norm() < 1e-8);
        // first derivatives by central differences at the origin
        const double h = 1e-3;
        Mat2 dx = (c.metric(Vec2(h, 0)) - c.metric(Vec2(-h, 0))) / (2 * h);
        Mat2 dy = (c.metric(Vec2(0, h)) - c.metric(Vec2(0, -h))) / (2 * h);
        CHECK(dx.norm() < 1e-6);
        CHECK(dy.norm() < 1e-6);
        // curvature shows up at second order: radial direction is exact, angular scales by (psi(r)/r)^2
        double r = 0.1;
        Mat2 g = c.metric(Vec2(0, r));
        CHECK(std::abs(g(0, 0) - std::pow(psi(s, r) / r, 2)) < 1e-8);
        CHECK(std::abs(g(1, 1) - 1.0) < 1e-8);
        // round trip
        Vec2 xi(0.05, -0.08);
        CHECK((c.to_chart(c.from_chart(xi)) - xi).norm() < 1e-12);
    }
    Chart e = normal_chart(Surface::euclidean(), {disk(1, 2), Vec3(0, 1, 0)});
    CHECK((e.to_chart(disk(1, 3)) - Vec2(1, 0)).norm() < 1e-14);
    CHECK((e.to_chart(disk(0, 2)) - Vec2(0, 1)).norm() < 1e-14);
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(Surface::general_chart([](const Vec2&) { return Mat2(-Mat2::Identity()); }), ConstructionError);
    CHECK_THROWS_AS(make_surface("torus"), InputError);
    CHECK_THROWS_AS(Surface::hyperbolic().check_point(disk(1.2, 0)), DomainError);
    CHECK_THROWS_AS(Surface::sphere().check_point(Vec3(1, 1, 0)), DomainError);
}
