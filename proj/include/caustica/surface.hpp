#pragma once

// Surfaces: the three constant-curvature models and general metric charts.
//
// Points and tangent vectors are Eigen::Vector3d in model coordinates:
//   euclidean      (x, y, 0)
//   sphere         unit vectors of R^3, tangents orthogonal to the point
//   hyperbolic     Poincare disk (x, y, 0), |z| < 1, metric 2|dz| / (1 - |z|^2)
//   general-chart  chart coordinates (x, y, 0) with a user metric g(x, y)

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "caustica/errors.hpp"

namespace caustica {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;

enum class SurfaceKind { euclidean, sphere, hyperbolic, general_chart };

std::string to_string(SurfaceKind kind);

// A point with a metric-unit tangent vector; also used as an oriented geodesic.
struct UnitTangent {
    Vec3 point = Vec3::Zero();
    Vec3 vector = Vec3::UnitX();
};

// Intersection of two oriented geodesics: the point and the flow times along each.
struct Crossing {
    Vec3 point;
    double time_a = 0.0;
    double time_b = 0.0;
};

struct GeneralChartOptions {
    double integrator_step = 1e-3;  // RK4 step as a fraction of the requested arclength
    double domain_radius = 10.0;    // chart coordinates must satisfy |(x, y)| < domain_radius
    double christoffel_step = 1e-5;
};

class Surface {
public:
    // christoffel[k](i, j) = Gamma^k_ij
    using Christoffel = std::array<Mat2, 2>;
    using MetricFn = std::function<Mat2(const Vec2&)>;
    using ChristoffelFn = std::function<Christoffel(const Vec2&)>;

    static Surface euclidean();
    static Surface sphere();
    static Surface hyperbolic();
    // Throws ConstructionError if the metric is not SPD at the probe points.
    static Surface general_chart(MetricFn metric, ChristoffelFn christoffel = {}, GeneralChartOptions opts = {});

    SurfaceKind kind() const { return kind_; }
    bool constant_curvature() const { return kind_ != SurfaceKind::general_chart; }
    // Points of the form (x, y, 0)?
    bool planar() const { return kind_ != SurfaceKind::sphere; }
    // 0, +1, -1; throws UnsupportedKindError on general charts
    int model_sign() const;
    // Gaussian curvature (NaN for general charts)
    double curvature() const;
    double integrator_step() const;
    std::string name() const { return to_string(kind_); }

    void check_point(const Vec3& p) const;
    bool contains(const Vec3& p) const;

    Mat2 metric(const Vec3& p) const;
    Christoffel christoffel(const Vec3& p) const;
    double area_density(const Vec3& p) const;

    double inner(const Vec3& p, const Vec3& u, const Vec3& v) const;
    double norm(const Vec3& p, const Vec3& v) const;
    Vec3 project_tangent(const Vec3& p, const Vec3& v) const;
    UnitTangent unit(const Vec3& p, const Vec3& v) const;
    // Rotation by +pi/2 in the tangent plane (left normal), length preserved.
    Vec3 left_normal(const Vec3& p, const Vec3& v) const;

    UnitTangent flow(const UnitTangent& u, double s) const;
    double distance(const Vec3& p, const Vec3& q) const;
    // Unit tangent at p along the minimizing geodesic towards q.
    UnitTangent toward(const Vec3& p, const Vec3& q) const;
    double angle(const Vec3& p, const Vec3& u, const Vec3& v) const;
    double oriented_angle(const Vec3& p, const Vec3& u, const Vec3& v) const;

    // Crossing of two geodesics; empty when they do not meet (parallel or
    // ultraparallel). On the sphere the crossing nearer to both base points is
    // returned; on general charts Newton starts from the chart-line crossing.
    std::optional<Crossing> intersect(const UnitTangent& a, const UnitTangent& b) const;
    // Signed offset of q from the oriented geodesic g, positive on the left;
    // an increasing function of the signed distance, vanishing exactly on g.
    double side(const UnitTangent& g, const Vec3& q) const;
    // Signed flow time along g of a point q lying on g.
    double position_on(const UnitTangent& g, const Vec3& q) const;

    // Signed geodesic curvature of a curve with model derivatives d1, d2 at p
    // (positive when turning left).
    double geodesic_curvature(const Vec3& p, const Vec3& d1, const Vec3& d2) const;

    // Lifted coordinates of the constant-curvature models (see lifted.hpp).
    Vec3 lift(const Vec3& p) const;
    Vec3 lift_tangent(const Vec3& p, const Vec3& v) const;
    Vec3 drop(const Vec3& x) const;

    const GeneralChartOptions& chart_options() const;

private:
    struct ChartData;
    SurfaceKind kind_ = SurfaceKind::euclidean;
    std::shared_ptr<const ChartData> chart_;

    void chart_rhs(const double* state, double* deriv) const;
    UnitTangent chart_flow(const UnitTangent& u, double s) const;
    std::pair<UnitTangent, double> chart_shoot(const Vec3& p, const Vec3& q) const;
};

// Builds a surface from a spec: euclidean | sphere | hyperbolic |
// general:identity | general:diag=a,b | general:stereographic | general:poincare
Surface make_surface(const std::string& spec);

UnitTangent geodesic_flow(const Surface& s, const UnitTangent& u, double t);
double distance(const Surface& s, const Vec3& p, const Vec3& q);
double angle(const Surface& s, const Vec3& p, const Vec3& u, const Vec3& v);

// Circumference of a geodesic circle of radius r divided by 2 pi: r, sin r or sinh r.
double psi(const Surface& s, double r);
// |d/dphi exp_x(r v(phi))| / r by central differences of the geodesic flow.
double big_psi(const Surface& s, const UnitTangent& v, double r);
// Length of the geodesic circle of radius r about center, by quadrature over the
// angle of the exponential map.
double circle_circumference(const Surface& s, const Vec3& center, double r);

// Geodesic normal coordinates at axis.point with first axis along axis.vector.
class Chart {
public:
    Chart(Surface surface, UnitTangent axis);
    const Vec3& origin() const { return axis_.point; }
    const Vec3& e1() const { return axis_.vector; }
    const Vec3& e2() const { return e2_; }
    const Surface& surface() const { return surface_; }
    Vec2 to_chart(const Vec3& p) const;
    Vec3 from_chart(const Vec2& xi) const;
    // Pull-back metric at xi by central differences of from_chart.
    Mat2 metric(const Vec2& xi, double h = 1e-5) const;

private:
    Surface surface_;
    UnitTangent axis_;
    Vec3 e2_;
};

Chart normal_chart(const Surface& s, const UnitTangent& axis);

}  // namespace caustica
