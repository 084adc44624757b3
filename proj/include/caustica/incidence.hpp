#pragma once

// Ceva products with the circle-length function psi, the tangent incidence
// property of convex curves, and the tangent-length coboundary
// psi(L_A) / psi(L_B) against (kappa(B) / kappa(A))^{1/3}.
//
// Signed lengths: a foot F on the geodesic from P to Q sits at flow time x from
// P, so PF = x and FQ = |PQ| - x. Both are positive for F strictly between P and
// Q; beyond Q the second turns negative and behind P the first does. The ratio
// psi(PF) / psi(FQ) uses sign(d) psi(|d|) for each signed length d.

#include <optional>
#include <utility>

#include "caustica/convex_curve.hpp"

namespace caustica {

struct GeodesicTriangle {
    Vec3 a = Vec3::Zero(), b = Vec3::Zero(), c = Vec3::Zero();
};

// Throws InputError unless the vertices are pairwise distinct and not collinear.
void validate_triangle(const Surface& s, const GeodesicTriangle& t);

// psi(AB')/psi(B'C) * psi(CA')/psi(A'B) * psi(BC')/psi(C'A) for feet A' on BC,
// B' on CA and C' on AB. Throws InputError when a foot is off its line by more
// than 1e-9.
double ceva_product(const Surface& s, const GeodesicTriangle& t, const Vec3& a1, const Vec3& b1, const Vec3& c1);

// Concurrency of three geodesics.
struct Concurrency {
    // |det| of the unit normals of the three geodesic planes in lifted
    // coordinates: zero exactly when the geodesics meet at one projective point
    // (constant curvature only, NaN on general charts).
    double projective = 0.0;
    // largest distance between the pairwise crossings; empty when some pair
    // does not cross inside the surface
    std::optional<double> distance;
};

Concurrency concurrency(const Surface& s, const UnitTangent& g1, const UnitTangent& g2, const UnitTangent& g3);

// Concurrency of the cevians AA', BB', CC'.
Concurrency cevian_concurrency(const Surface& s, const GeodesicTriangle& t, const Vec3& a1, const Vec3& b1,
                               const Vec3& c1);

// Tangent geodesics a, b, c at the points s_a, s_b, s_c of the curve; the
// triangle A = b ^ c, B = c ^ a, C = a ^ b and the concurrency of the lines
// joining its vertices to the tangency points.
struct TangentIncidence {
    GeodesicTriangle triangle;
    Vec3 a1 = Vec3::Zero(), b1 = Vec3::Zero(), c1 = Vec3::Zero();
    Concurrency residual;
};

TangentIncidence tangent_incidence_check(const ConvexCurve& curve, double s_a, double s_b, double s_c);

// {psi(|CA|) / psi(|CB|), (kappa(B) / kappa(A))^{1/3}} for C the crossing of the
// tangent geodesics at A and B.
std::pair<double, double> coboundary_ratio(const ConvexCurve& curve, double s_a, double s_b);

}  // namespace caustica
