#pragma once

// Convex curves on surfaces: natural length, geodesic curvature, the Lazutkin
// parameter, tangent geodesics and the string function
//   L(A, B) = |A C| + |C B| - lambda(A, B),
// where C is the crossing of the tangent geodesics at A and B.

#include <array>
#include <memory>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include "caustica/curve_model.hpp"
#include "caustica/surface.hpp"

namespace caustica {

// Point where a geodesic crosses a curve: natural length on the curve and signed
// position along the geodesic.
struct CurveCrossing {
    double s = 0.0;
    double position = 0.0;
};

struct CurveOptions {
    // Normalization point of the Lazutkin parameter, as a curve parameter;
    // defaults to the middle of the parameter domain.
    std::optional<double> base_parameter;
    int panels = 128;
    // Largest total turning (integral of kappa, radians) between two tangency
    // points accepted by tangent_intersection.
    double max_turning = 2.0;
    int convexity_probes = 512;
};

class ConvexCurve {
public:
    ConvexCurve(Surface surface, std::shared_ptr<const CurveModel> model, CurveOptions opts = {});

    const Surface& surface() const { return surface_; }
    const CurveModel& model() const { return *model_; }
    std::shared_ptr<const CurveModel> model_ptr() const { return model_; }
    const CurveOptions& options() const { return opts_; }
    bool closed() const { return model_->periodic; }
    // Natural length of the parameter domain (the perimeter for closed curves).
    double length() const { return tables_->cum_s.back(); }
    // Arclength of the normalization point.
    double s0() const { return s0_; }
    double kappa_max() const { return tables_->kappa_max; }

    // Parameter <-> natural length (s measured from the start of the domain;
    // closed curves accept any real s).
    double parameter(double s) const;
    double natural_length(double u) const;
    // Signed arclength between two parameters.
    double arc_length(double ua, double ub) const;

    Vec3 point(double s) const;
    UnitTangent tangent_geodesic(double s) const;
    Vec3 left_normal(double s) const;
    std::array<Vec3, 6> derivatives(double s) const;

    // kappa(s); throws ConvexityError when kappa <= 0.
    double geodesic_curvature(double s) const;
    double signed_curvature(double s) const;
    // Integral of kappa between two natural lengths.
    double turning(double sa, double sb) const;

    // t_L(s) = integral of kappa^{2/3} from s0 to s; the normalized variant is
    // multiplied by kappa(s0)^{1/3}.
    double lazutkin_parameter(double s, bool normalized = false) const;
    double lazutkin_inverse(double t, bool normalized = false) const;
    double lazutkin_total() const { return tables_->cum_lz.back(); }
    // Integral of kappa^{1/3} from the start of the domain (affine length).
    double affine_length(double s) const;
    double affine_inverse(double a) const;
    double affine_total() const { return tables_->cum_af.back(); }

    // Crossing of the tangent geodesics at s_a and s_b (concave side).
    Crossing tangent_intersection(double s_a, double s_b) const;
    double string_length(double s_a, double s_b) const;
    // Lambda(t) = L(0, t) - L(-t, 0) in the normalized Lazutkin parameter about s0.
    double lambda_defect(double t) const;

    // Closest point of the curve to q (natural length in [0, length)), searched
    // over the whole domain on a coarse grid and refined.
    double closest_point(const Vec3& q) const;
    // Tangency points {s_a, s_b} of the two tangent geodesics through an exterior
    // point q, with s_a < s_b and q = C(s_a, s_b). Throws DomainError when q is
    // on or inside the curve.
    std::pair<double, double> tangency_points(const Vec3& q) const;
    // All transversal crossings of the geodesic g with the curve, sorted by
    // position along g (sign changes of the side function on a 256-point grid).
    std::vector<CurveCrossing> crossings(const UnitTangent& g) const;

private:
    struct Tables {
        std::vector<double> knots;   // parameter breakpoints
        std::vector<double> cum_s;   // natural length at knots
        std::vector<double> cum_lz;  // integral of kappa^{2/3} ds at knots
        std::vector<double> cum_tn;  // integral of kappa ds at knots
        std::vector<double> cum_af;  // integral of kappa^{1/3} ds at knots
        double kappa_max = 0.0;
    };

    double speed(double u) const;
    double kappa_at(double u) const;
    double cumulative(const std::vector<double>& table, int which, double u) const;
    double invert(const std::vector<double>& table, int which, double value) const;
    double integrand(int which, double u) const;

    Surface surface_;
    std::shared_ptr<const CurveModel> model_;
    CurveOptions opts_;
    std::shared_ptr<const Tables> tables_;
    double s0_ = 0.0;
    double kappa0_ = 0.0;
    double lz0_ = 0.0;
};

// Symmetric 3x3 matrix C of a quadric <C X, X> = 0 in lifted coordinates.
struct ConicSpec {
    SurfaceKind kind = SurfaceKind::euclidean;
    Eigen::Matrix3d c = Eigen::Matrix3d::Identity();
};

// Branch of the conic through base (model coordinates), oriented so that
// kappa > 0. When base is omitted the conic is intersected with the geodesic
// from the model origin along e1.
ConvexCurve make_conic(const ConicSpec& spec, std::optional<Vec3> base = std::nullopt, CurveOptions opts = {});

// Closed curve through n points taken at equal steps of a periodic parameter
// with the given period, by trigonometric interpolation with (n - 1) / 2 modes.
ConvexCurve make_interpolated_curve(const Surface& surface, const std::vector<Vec3>& points, double period,
                                    const std::string& description);

ConvexCurve make_circle(double r, Vec2 center = Vec2::Zero(), CurveOptions opts = {});
ConvexCurve make_ellipse(double a, double b, CurveOptions opts = {});
ConvexCurve make_quartic_oval(double r = 1.0, CurveOptions opts = {});
// Geodesic circle of radius r about the model origin on a constant-curvature surface.
ConvexCurve make_geodesic_circle(const Surface& s, double r, CurveOptions opts = {});
// Graph y = sum b_k x^k / k! over |x| <= half_width in the plane (kind 0), the
// gnomonic chart (kind +1) or the Klein chart (kind -1); b has entries b0..b5.
ConvexCurve make_graph(const Surface& s, const std::array<double, 6>& b, double half_width = 0.3,
                       CurveOptions opts = {});

// Curve mini-language: circle:r=1 | ellipse:a=2,b=1 | quartic:r=1 |
// conic:k=sphere,c=[...] | graph:coeffs=[b1,...,b5]; optional k=euclidean|sphere|hyperbolic.
ConvexCurve parse_curve(const std::string& spec);

}  // namespace caustica
