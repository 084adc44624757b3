#include "caustica/incidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace caustica {

namespace {

double signed_psi(const Surface& s, double d) { return std::copysign(psi(s, std::abs(d)), d); }

// psi(PF) / psi(FQ) for the foot F on the geodesic from P to Q.
double foot_ratio(const Surface& s, const Vec3& p, const Vec3& q, const Vec3& f, const char* name) {
    UnitTangent g = s.toward(p, q);
    if (std::abs(s.side(g, f)) > 1e-9) throw InputError(std::string("foot ") + name + " is not on its side line");
    const double x = s.position_on(g, f), len = s.distance(p, q);
    return signed_psi(s, x) / signed_psi(s, len - x);
}

Vec3 plane_normal(const Surface& s, const UnitTangent& g) {
    return s.lift(g.point).cross(s.lift_tangent(g.point, g.vector)).normalized();
}

}  // namespace

void validate_triangle(const Surface& s, const GeodesicTriangle& t) {
    s.check_point(t.a);
    s.check_point(t.b);
    s.check_point(t.c);
    if (s.distance(t.a, t.b) < 1e-12 || s.distance(t.b, t.c) < 1e-12 || s.distance(t.c, t.a) < 1e-12)
        throw InputError("triangle vertices must be distinct");
    if (std::abs(s.side(s.toward(t.a, t.b), t.c)) < 1e-12) throw InputError("triangle vertices are collinear");
}

double ceva_product(const Surface& s, const GeodesicTriangle& t, const Vec3& a1, const Vec3& b1, const Vec3& c1) {
    validate_triangle(s, t);
    return foot_ratio(s, t.a, t.c, b1, "B'") * foot_ratio(s, t.c, t.b, a1, "A'") * foot_ratio(s, t.b, t.a, c1, "C'");
}

Concurrency concurrency(const Surface& s, const UnitTangent& g1, const UnitTangent& g2, const UnitTangent& g3) {
    Concurrency r;
    if (s.constant_curvature()) {
        Eigen::Matrix3d m;
        m << plane_normal(s, g1), plane_normal(s, g2), plane_normal(s, g3);
        r.projective = std::abs(m.determinant());
    } else {
        r.projective = std::numeric_limits<double>::quiet_NaN();
    }
    auto x12 = s.intersect(g1, g2), x23 = s.intersect(g2, g3), x31 = s.intersect(g3, g1);
    if (x12 && x23 && x31) {
        r.distance = std::max({s.distance(x12->point, x23->point), s.distance(x23->point, x31->point),
                               s.distance(x31->point, x12->point)});
    }
    return r;
}

Concurrency cevian_concurrency(const Surface& s, const GeodesicTriangle& t, const Vec3& a1, const Vec3& b1,
                               const Vec3& c1) {
    validate_triangle(s, t);
    return concurrency(s, s.toward(t.a, a1), s.toward(t.b, b1), s.toward(t.c, c1));
}

TangentIncidence tangent_incidence_check(const ConvexCurve& curve, double s_a, double s_b, double s_c) {
    const Surface& s = curve.surface();
    if (s_a == s_b || s_b == s_c || s_c == s_a) throw DomainError("tangency parameters must be distinct");
    UnitTangent a = curve.tangent_geodesic(s_a), b = curve.tangent_geodesic(s_b), c = curve.tangent_geodesic(s_c);
    auto meet = [&](const UnitTangent& g, const UnitTangent& h) {
        auto x = s.intersect(g, h);
        if (!x) throw GeometryError("tangent geodesics do not cross");
        return x->point;
    };
    TangentIncidence r;
    r.triangle = {meet(b, c), meet(c, a), meet(a, b)};
    r.a1 = a.point;
    r.b1 = b.point;
    r.c1 = c.point;
    r.residual = cevian_concurrency(s, r.triangle, r.a1, r.b1, r.c1);
    return r;
}

std::pair<double, double> coboundary_ratio(const ConvexCurve& curve, double s_a, double s_b) {
    const Surface& s = curve.surface();
    Crossing c = curve.tangent_intersection(s_a, s_b);
    const double la = s.distance(c.point, curve.point(s_a)), lb = s.distance(c.point, curve.point(s_b));
    return {psi(s, la) / psi(s, lb), std::cbrt(curve.geodesic_curvature(s_b) / curve.geodesic_curvature(s_a))};
}

}  // namespace caustica
