#pragma once

// String construction: the curve Gamma_p of crossings C(A, B) with L(A, B) = p,
// the string map T_p : A -> B, and checks of the string Poritsky property in the
// normalized Lazutkin parameter.

#include <optional>
#include <vector>

#include "caustica/convex_curve.hpp"

namespace caustica {

enum class StringMethod { pair_rootfind, bisector_ode };

StringMethod parse_string_method(const std::string& name);

struct StringSample {
    double s_a = 0.0;
    double s_b = 0.0;
    Vec3 c = Vec3::Zero();
    double residual = 0.0;  // L(s_a, s_b) - p
};

struct StringCurve {
    double p = 0.0;
    StringMethod method = StringMethod::pair_rootfind;
    std::vector<StringSample> samples;
    // bisector_ode only: largest distance between an integrated point and the
    // root-found point with the same first tangency (the cross-validation figure).
    double method_gap = 0.0;
};

struct StringOptions {
    int samples = 64;
    // Anchor range in natural length; defaults to the whole closed curve, or the
    // first half of an open arc.
    std::optional<double> s_begin, s_end;
    // bisector_ode: integration step (natural length of Gamma_p) and span.
    double ode_step = 5e-3;
    double ode_span = 0.5;
};

// s_b > s_a with L(s_a, s_b) = p, solved to |L - p| <= 1e-12 from the cube-root
// seed (12 p / kappa^2)^{1/3}. Throws RangeError when no root is bracketed.
double string_map(const ConvexCurve& curve, double p, double s_a);

StringCurve string_curve(const ConvexCurve& curve, double p, StringMethod method = StringMethod::pair_rootfind,
                         const StringOptions& opts = {});

// Closed curve through the samples of a pair-rootfind string curve whose anchors
// cover a closed parent uniformly (the default anchor range), by trigonometric
// interpolation in the anchor parameter.
ConvexCurve string_curve_as_curve(const ConvexCurve& parent, const StringCurve& g);

// Exterior bisector at C of the two tangent geodesics through C, oriented from
// the first tangency towards the second; L(A(C), B(C)) is stationary along it.
UnitTangent bisector_direction(const ConvexCurve& curve, const Vec3& c);

struct PoritskyReport {
    std::vector<double> p;
    std::vector<double> c_p;            // mean increment of the parameter
    std::vector<double> max_deviation;  // max |increment - mean|
    double tolerance = 0.0;
    bool pass = false;
};

// Increments t(T_p(A)) - t(A) of the normalized Lazutkin parameter over n anchors
// spread along the curve (or opts' anchor range on open arcs).
PoritskyReport poritsky_check(const ConvexCurve& curve, const std::vector<double>& p_list, int n_samples,
                              double tolerance = 1e-6);

// Orbit A_m = T_p^m(A_0) over one turn of a closed curve, compared with the
// Lazutkin parameter: the orbit index m is an empirical Poritsky parameter.
struct PoritskyOrbit {
    std::vector<double> s;    // natural lengths, unwrapped
    std::vector<double> t;    // normalized Lazutkin parameter at s
    double slope = 0.0;       // affine fit t ~ slope * m + intercept
    double intercept = 0.0;
    double max_affine_error = 0.0;
    double max_second_difference = 0.0;
    // spread (max / min - 1) of kappa^{2/3}(A_m) * lambda(A_m, A_{m+1})
    double kappa_lambda_spread = 0.0;
};

PoritskyOrbit string_orbit(const ConvexCurve& curve, double p, double s_start, int max_steps = 100000);

// L(s_a, s_a + delta) / (kappa(s_a)^2 delta^3 / 12).
double lasyl_ratio(const ConvexCurve& curve, double s_a, double delta);

}  // namespace caustica
