#pragma once

// Outer billiards: the outer map about a convex curve, the area construction
// gamma_p (envelope of the chords cutting off area p), the area Poritsky check
// and the chord angle ratio sin(alpha) / sin(beta).

#include <string>
#include <vector>

#include "caustica/convex_curve.hpp"
#include "caustica/string_construction.hpp"

namespace caustica {

struct OuterStep {
    Vec3 image = Vec3::Zero();
    double s_tangency = 0.0;  // natural length of B on the curve
    Vec3 tangency = Vec3::Zero();
    double distance = 0.0;    // |AB|
};

// The tangent geodesic from an exterior point A touching the curve at B with A
// behind B (the curve's orientation at B points away from A); A is sent to the
// point at distance |AB| beyond B. Throws DomainError when A is not exterior.
OuterStep outer_step(const ConvexCurve& gamma, const Vec3& a);
Vec3 outer_map(const ConvexCurve& gamma, const Vec3& a);

// Area of the region bounded by the arc from s1 to s2 > s1 and the chord
// geodesic from curve(s2) back to curve(s1): the region on the right of the
// chord oriented from curve(s1) to curve(s2).
double cap_area(const ConvexCurve& curve, double s1, double s2);
// Area enclosed by a closed curve.
double enclosed_area(const ConvexCurve& curve);
// Area of the part of the curve's interior on the right of g (the part whose
// boundary runs through the chord against g). Throws GeometryError unless g
// crosses the curve twice.
double area_cut(const ConvexCurve& curve, const UnitTangent& g);

// s2 > s1 with cap_area(s1, s2) = p.
double area_map(const ConvexCurve& curve, double p, double s1);

struct AreaSample {
    double s1 = 0.0, s2 = 0.0;      // chord endpoints on the parent
    UnitTangent chord;              // at curve(s1), towards curve(s2)
    double chord_length = 0.0;
    Vec3 envelope = Vec3::Zero();   // tangency point with gamma_p, on the chord
    double envelope_position = 0.0; // flow time of the envelope point along chord
    double area_residual = 0.0;     // cap area - p
};

struct AreaCurve {
    double p = 0.0;
    std::vector<AreaSample> samples;
    // largest |position - chord_length / 2| of the envelope points
    double max_bisection_residual = 0.0;
    double max_area_residual = 0.0;
    bool degenerate = false;  // envelope cusp or backtracking detected
    std::string warning;
};

struct AreaOptions {
    int samples = 256;
    // neighbouring-chord offset, as a fraction of the chord's arc
    double envelope_step = 0.02;
};

// Chords of area p with start anchors at equal natural-length steps around a
// closed curve; envelope points from the crossings with the two neighbouring
// chords, refined by Richardson extrapolation in the offset.
AreaCurve area_construction(const ConvexCurve& curve, double p, const AreaOptions& opts = {});

// gamma_p as a closed curve (trigonometric interpolation of the envelope points).
ConvexCurve area_curve_as_curve(const ConvexCurve& parent, const AreaCurve& g);

// Planar fit of the envelope points to lambda * (Gamma - center) + center along
// rays from the center.
struct HomothetyFit {
    double lambda = 0.0;
    double max_residual = 0.0;  // largest distance from the fitted curve
};
HomothetyFit homothety_fit(const ConvexCurve& parent, const AreaCurve& g, const Vec2& center = Vec2::Zero());

// Empirical area Poritsky parameter of a closed curve,
//   t(s) = a(s) + sum_k (c_k cos(k theta) + d_k sin(k theta)),  theta = 2 pi a(s) / A,
// with a the affine length and A its total; the coefficients make the increments
// t(T_p s) - t(s) as equal as possible at the reference p.
class AreaPoritskyParameter {
public:
    AreaPoritskyParameter(const ConvexCurve& curve, double p_ref, int anchors = 256, int modes = 32);
    double t(double s) const;
    double dt_ds(double s) const;
    double reference_p() const { return p_ref_; }
    // increment spread at the reference p after the fit
    double fit_residual() const { return fit_residual_; }

private:
    ConvexCurve curve_;
    double p_ref_ = 0.0;
    double fit_residual_ = 0.0;
    std::vector<double> cos_, sin_;
};

// Increments of the empirical parameter (fitted at p_ref) under the area map
// at each p of p_list, over n anchors around the curve.
PoritskyReport area_poritsky_check(const ConvexCurve& curve, const std::vector<double>& p_list, int n_samples,
                                   double p_ref = 5e-4, double tolerance = 1e-5);

// sin(alpha) / sin(beta) for the angles alpha at A and beta at B between the
// chord AB and the curve.
double chord_angle_ratio(const ConvexCurve& curve, double s_a, double s_b);

}  // namespace caustica
