#include "caustica/surface.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "caustica/lifted.hpp"
#include "caustica/numerics.hpp"

namespace caustica {

namespace {

using lifted::V3;

V3<double> arr(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec(const V3<double>& a) { return {a[0], a[1], a[2]}; }

Vec2 xy(const Vec3& p) { return p.head<2>(); }

Mat2 hyperbolic_metric(const Vec2& p) {
    double lam = 2.0 / (1.0 - p.squaredNorm());
    return lam * lam * Mat2::Identity();
}

// Christoffel symbols of a conformal metric e^{2 phi} I from grad phi.
Surface::Christoffel conformal_christoffel(const Vec2& grad) {
    Surface::Christoffel g;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                g[k](i, j) = (i == k ? grad(j) : 0.0) + (j == k ? grad(i) : 0.0) - (i == j ? grad(k) : 0.0);
    return g;
}

}  // namespace

struct Surface::ChartData {
    MetricFn metric;
    ChristoffelFn christoffel;
    GeneralChartOptions opts;
};

std::string to_string(SurfaceKind kind) {
    switch (kind) {
        case SurfaceKind::euclidean: return "euclidean";
        case SurfaceKind::sphere: return "sphere";
        case SurfaceKind::hyperbolic: return "hyperbolic";
        case SurfaceKind::general_chart: return "general-chart";
    }
    return "unknown";
}

Surface Surface::euclidean() {
    Surface s;
    s.kind_ = SurfaceKind::euclidean;
    return s;
}

Surface Surface::sphere() {
    Surface s;
    s.kind_ = SurfaceKind::sphere;
    return s;
}

Surface Surface::hyperbolic() {
    Surface s;
    s.kind_ = SurfaceKind::hyperbolic;
    return s;
}

Surface Surface::general_chart(MetricFn metric, ChristoffelFn christoffel, GeneralChartOptions opts) {
    if (!metric) throw ConstructionError("general chart needs a metric function");
    if (!(opts.integrator_step > 0.0 && opts.integrator_step <= 1.0))
        throw ConstructionError("integrator_step must lie in (0, 1]");
    if (!(opts.domain_radius > 0.0)) throw ConstructionError("domain_radius must be positive");
    double probe = std::min(1.0, 0.9 * opts.domain_radius);
    for (int i = -2; i <= 2; ++i) {
        for (int j = -2; j <= 2; ++j) {
            Vec2 p(probe * i / 2.0 * 0.99, probe * j / 2.0 * 0.99);
            if (p.norm() >= opts.domain_radius) continue;
            Mat2 g = metric(p);
            if (!g.allFinite() || std::abs(g(0, 1) - g(1, 0)) > 1e-12 * (1.0 + g.norm()) || g(0, 0) <= 0.0 ||
                g.determinant() <= 0.0) {
                std::ostringstream os;
                os << "metric is not symmetric positive-definite at (" << p.x() << ", " << p.y() << ")";
                throw ConstructionError(os.str());
            }
        }
    }
    Surface s;
    s.kind_ = SurfaceKind::general_chart;
    auto data = std::make_shared<ChartData>();
    data->metric = std::move(metric);
    data->christoffel = std::move(christoffel);
    data->opts = opts;
    s.chart_ = std::move(data);
    return s;
}

int Surface::model_sign() const {
    switch (kind_) {
        case SurfaceKind::euclidean: return 0;
        case SurfaceKind::sphere: return 1;
        case SurfaceKind::hyperbolic: return -1;
        default: throw UnsupportedKindError("general charts have no constant-curvature model");
    }
}

double Surface::curvature() const {
    if (kind_ == SurfaceKind::general_chart) return std::numeric_limits<double>::quiet_NaN();
    return double(model_sign());
}

double Surface::integrator_step() const { return chart_ ? chart_->opts.integrator_step : 1e-3; }

const GeneralChartOptions& Surface::chart_options() const {
    static const GeneralChartOptions defaults{};
    return chart_ ? chart_->opts : defaults;
}

bool Surface::contains(const Vec3& p) const {
    if (!p.allFinite()) return false;
    switch (kind_) {
        case SurfaceKind::euclidean: return std::abs(p.z()) <= 1e-12;
        case SurfaceKind::sphere: return std::abs(p.norm() - 1.0) <= 1e-10;
        case SurfaceKind::hyperbolic: return std::abs(p.z()) <= 1e-12 && xy(p).squaredNorm() < 1.0;
        case SurfaceKind::general_chart:
            return std::abs(p.z()) <= 1e-12 && xy(p).norm() < chart_->opts.domain_radius;
    }
    return false;
}

void Surface::check_point(const Vec3& p) const {
    if (!contains(p)) {
        std::ostringstream os;
        os << "point (" << p.x() << ", " << p.y() << ", " << p.z() << ") is not on the " << name() << " model";
        throw DomainError(os.str());
    }
}

Mat2 Surface::metric(const Vec3& p) const {
    switch (kind_) {
        case SurfaceKind::euclidean: return Mat2::Identity();
        case SurfaceKind::hyperbolic: return hyperbolic_metric(xy(p));
        case SurfaceKind::general_chart: return chart_->metric(xy(p));
        default: throw UnsupportedKindError("the sphere is embedded; use inner() instead of a chart metric");
    }
}

Surface::Christoffel Surface::christoffel(const Vec3& p) const {
    switch (kind_) {
        case SurfaceKind::euclidean: return {Mat2::Zero(), Mat2::Zero()};
        case SurfaceKind::hyperbolic: {
            Vec2 z = xy(p);
            return conformal_christoffel(2.0 * z / (1.0 - z.squaredNorm()));
        }
        case SurfaceKind::general_chart: {
            Vec2 z = xy(p);
            if (chart_->christoffel) return chart_->christoffel(z);
            const double h = chart_->opts.christoffel_step;
            std::array<Mat2, 2> dg;
            for (int l = 0; l < 2; ++l) {
                Vec2 e = Vec2::Zero();
                e(l) = h;
                dg[l] = (chart_->metric(z + e) - chart_->metric(z - e)) / (2.0 * h);
            }
            Mat2 ginv = chart_->metric(z).inverse();
            Christoffel g;
            for (int k = 0; k < 2; ++k)
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                        double s = 0.0;
                        for (int l = 0; l < 2; ++l)
                            s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
                        g[k](i, j) = 0.5 * s;
                    }
            return g;
        }
        default: throw UnsupportedKindError("Christoffel symbols are only provided for planar charts");
    }
}

double Surface::area_density(const Vec3& p) const {
    if (kind_ == SurfaceKind::sphere) return 1.0;
    return std::sqrt(metric(p).determinant());
}

double Surface::inner(const Vec3& p, const Vec3& u, const Vec3& v) const {
    switch (kind_) {
        case SurfaceKind::euclidean: return u.head<2>().dot(v.head<2>());
        case SurfaceKind::sphere: return u.dot(v);
        default: return u.head<2>().dot(metric(p) * v.head<2>());
    }
}

double Surface::norm(const Vec3& p, const Vec3& v) const { return std::sqrt(inner(p, v, v)); }

Vec3 Surface::project_tangent(const Vec3& p, const Vec3& v) const {
    if (kind_ == SurfaceKind::sphere) return v - v.dot(p) * p;
    return {v.x(), v.y(), 0.0};
}

UnitTangent Surface::unit(const Vec3& p, const Vec3& v) const {
    Vec3 w = project_tangent(p, v);
    double n = norm(p, w);
    if (!(n > 0.0)) throw InputError("zero tangent vector");
    return {p, w / n};
}

Vec3 Surface::left_normal(const Vec3& p, const Vec3& v) const {
    switch (kind_) {
        case SurfaceKind::euclidean: return {-v.y(), v.x(), 0.0};
        case SurfaceKind::sphere: return p.cross(v);
        default: {
            Mat2 g = metric(p);
            Vec2 gv = g * v.head<2>();
            return Vec3(-gv.y(), gv.x(), 0.0) / std::sqrt(g.determinant());
        }
    }
}

Vec3 Surface::lift(const Vec3& p) const { return vec(lifted::lift_point(model_sign(), arr(p))); }

Vec3 Surface::lift_tangent(const Vec3& p, const Vec3& v) const {
    return vec(lifted::lift_tangent(model_sign(), arr(p), arr(v)));
}

Vec3 Surface::drop(const Vec3& x) const { return vec(lifted::drop_point(model_sign(), arr(x))); }

UnitTangent Surface::flow(const UnitTangent& u, double s) const {
    switch (kind_) {
        case SurfaceKind::euclidean: return {u.point + s * u.vector, u.vector};
        case SurfaceKind::general_chart: return chart_flow(u, s);
        default: break;
    }
    const int k = model_sign();
    V3<double> x = lifted::lift_point(k, arr(u.point));
    V3<double> v = lifted::lift_tangent(k, arr(u.point), arr(u.vector));
    V3<double> xo, vo;
    lifted::flow(k, x, v, s, xo, vo);
    if (k < 0) return {vec(lifted::drop_point(k, xo)), vec(lifted::drop_tangent(k, xo, vo))};
    return {vec(xo), vec(vo)};
}

double Surface::distance(const Vec3& p, const Vec3& q) const {
    if (kind_ == SurfaceKind::euclidean) return (p - q).norm();
    if (kind_ == SurfaceKind::general_chart) return chart_shoot(p, q).second;
    const int k = model_sign();
    return lifted::distance(k, lifted::lift_point(k, arr(p)), lifted::lift_point(k, arr(q)));
}

UnitTangent Surface::toward(const Vec3& p, const Vec3& q) const {
    if (kind_ == SurfaceKind::general_chart) return chart_shoot(p, q).first;
    if ((p - q).norm() == 0.0) throw InputError("toward: coincident points");
    const int k = model_sign();
    V3<double> x = lifted::lift_point(k, arr(p));
    V3<double> w = lifted::toward(k, x, lifted::lift_point(k, arr(q)));
    return {p, vec(lifted::drop_tangent(k, x, w))};
}

double Surface::angle(const Vec3& p, const Vec3& u, const Vec3& v) const {
    return std::abs(oriented_angle(p, u, v));
}

double Surface::oriented_angle(const Vec3& p, const Vec3& u, const Vec3& v) const {
    double nu = norm(p, u), nv = norm(p, v);
    if (!(nu > 0.0) || !(nv > 0.0)) throw InputError("angle of a zero vector");
    return std::atan2(inner(p, left_normal(p, u), v), inner(p, u, v));
}

std::optional<Crossing> Surface::intersect(const UnitTangent& a, const UnitTangent& b) const {
    if (kind_ == SurfaceKind::general_chart) {
        // Newton on the pair of flow times, seeded by the crossing of chart lines.
        Mat2 m;
        m << a.vector.x(), -b.vector.x(), a.vector.y(), -b.vector.y();
        if (std::abs(m.determinant()) < 1e-14) return std::nullopt;
        Vec2 t = m.fullPivLu().solve(xy(b.point - a.point));
        for (int it = 0; it < 50; ++it) {
            UnitTangent fa = flow(a, t(0)), fb = flow(b, t(1));
            Vec2 f = xy(fa.point - fb.point);
            m << fa.vector.x(), -fb.vector.x(), fa.vector.y(), -fb.vector.y();
            Vec2 dt = m.fullPivLu().solve(f);
            t -= dt;
            if (dt.norm() < 1e-14 * (1.0 + t.norm())) {
                return Crossing{flow(a, t(0)).point, t(0), t(1)};
            }
        }
        throw ConvergenceError("geodesic intersection: Newton did not converge");
    }
    const int k = model_sign();
    V3<double> xa = lifted::lift_point(k, arr(a.point)), va = lifted::lift_tangent(k, arr(a.point), arr(a.vector));
    V3<double> xb = lifted::lift_point(k, arr(b.point)), vb = lifted::lift_tangent(k, arr(b.point), arr(b.vector));
    V3<double> d = lifted::cross(lifted::cross(xa, va), lifted::cross(xb, vb));
    V3<double> x;
    if (!lifted::normalize_point(k, d, lifted::add(xa, xb), x)) return std::nullopt;
    if (k == 0 && std::abs(d[2]) < 1e-15 * std::sqrt(lifted::dot(d, d))) return std::nullopt;
    Crossing c;
    c.point = vec(lifted::drop_point(k, x));
    c.time_a = lifted::position_on(k, xa, va, x);
    c.time_b = lifted::position_on(k, xb, vb, x);
    return c;
}

double Surface::side(const UnitTangent& g, const Vec3& q) const {
    if (kind_ == SurfaceKind::general_chart) {
        if ((q - g.point).norm() == 0.0) return 0.0;
        auto [w, d] = chart_shoot(g.point, q);
        return d * inner(g.point, left_normal(g.point, g.vector), w.vector);
    }
    const int k = model_sign();
    return lifted::side(k, lifted::lift_point(k, arr(g.point)), lifted::lift_tangent(k, arr(g.point), arr(g.vector)),
                        lifted::lift_point(k, arr(q)));
}

double Surface::position_on(const UnitTangent& g, const Vec3& q) const {
    if (kind_ == SurfaceKind::general_chart) {
        if ((q - g.point).norm() == 0.0) return 0.0;
        auto [w, d] = chart_shoot(g.point, q);
        return d * inner(g.point, g.vector, w.vector);
    }
    const int k = model_sign();
    return lifted::position_on(k, lifted::lift_point(k, arr(g.point)),
                               lifted::lift_tangent(k, arr(g.point), arr(g.vector)), lifted::lift_point(k, arr(q)));
}

double Surface::geodesic_curvature(const Vec3& p, const Vec3& d1, const Vec3& d2) const {
    if (kind_ == SurfaceKind::sphere) {
        double n = d1.norm();
        return p.dot(d1.cross(d2)) / (n * n * n);
    }
    // Covariant acceleration a = x'' + Gamma(x', x'); kappa = sqrt(det g) (x' ^ a) / |x'|^3.
    Mat2 g = metric(p);
    Christoffel gam = christoffel(p);
    Vec2 v = d1.head<2>();
    Vec2 a = d2.head<2>();
    for (int k = 0; k < 2; ++k) a(k) += v.dot(gam[k] * v);
    double speed = std::sqrt(v.dot(g * v));
    return std::sqrt(g.determinant()) * (v.x() * a.y() - v.y() * a.x()) / (speed * speed * speed);
}

void Surface::chart_rhs(const double* s, double* d) const {
    Christoffel gam = christoffel(Vec3(s[0], s[1], 0.0));
    Vec2 v(s[2], s[3]);
    d[0] = s[2];
    d[1] = s[3];
    d[2] = -v.dot(gam[0] * v);
    d[3] = -v.dot(gam[1] * v);
}

UnitTangent Surface::chart_flow(const UnitTangent& u, double s) const {
    if (s == 0.0) return u;
    const int n = std::max(1, int(std::lround(1.0 / chart_->opts.integrator_step)));
    const double h = s / n;
    double y[4] = {u.point.x(), u.point.y(), u.vector.x(), u.vector.y()};
    double k1[4], k2[4], k3[4], k4[4], tmp[4];
    for (int i = 0; i < n; ++i) {
        chart_rhs(y, k1);
        for (int j = 0; j < 4; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
        chart_rhs(tmp, k2);
        for (int j = 0; j < 4; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
        chart_rhs(tmp, k3);
        for (int j = 0; j < 4; ++j) tmp[j] = y[j] + h * k3[j];
        chart_rhs(tmp, k4);
        for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        if (!(std::hypot(y[0], y[1]) < chart_->opts.domain_radius))
            throw DomainError("geodesic left the chart domain");
    }
    return {Vec3(y[0], y[1], 0.0), Vec3(y[2], y[3], 0.0)};
}

std::pair<UnitTangent, double> Surface::chart_shoot(const Vec3& p, const Vec3& q) const {
    Vec3 e1 = unit(p, Vec3::UnitX()).vector;
    Vec3 e2 = left_normal(p, e1);
    if ((q - p).norm() == 0.0) return {{p, e1}, 0.0};
    auto dir = [&](double th) { return UnitTangent{p, std::cos(th) * e1 + std::sin(th) * e2}; };
    Vec3 d = q - p;
    Vec3 w = unit(p, d).vector;
    double th = std::atan2(inner(p, w, e2), inner(p, w, e1));
    double len = std::sqrt(d.head<2>().dot(metric(0.5 * (p + q)) * d.head<2>()));
    const double h = 1e-6;
    double last = HUGE_VAL;
    for (int it = 0; it < 40; ++it) {
        UnitTangent end = flow(dir(th), len);
        Vec2 f = xy(end.point - q);
        if (f.norm() < 1e-15 * (1.0 + len)) return {dir(th), len};
        // Newton stalls at the integrator's noise floor
        if (f.norm() < 1e-11 * (1.0 + len) && f.norm() > 0.25 * last) return {dir(th), len};
        last = f.norm();
        Vec2 dth = xy(flow(dir(th + h), len).point - flow(dir(th - h), len).point) / (2.0 * h);
        Mat2 m;
        m << dth.x(), end.vector.x(), dth.y(), end.vector.y();
        Vec2 step = m.fullPivLu().solve(f);
        th -= step(0);
        len -= step(1);
        if (len < 0.0) {
            len = -len;
            th += M_PI;
        }
        if (step.norm() < 1e-14 * (1.0 + len)) return {dir(th), len};
    }
    throw ConvergenceError("geodesic shooting did not converge");
}

Surface make_surface(const std::string& spec) {
    if (spec == "euclidean" || spec == "plane") return Surface::euclidean();
    if (spec == "sphere") return Surface::sphere();
    if (spec == "hyperbolic" || spec == "disk") return Surface::hyperbolic();
    const std::string prefix = "general:";
    if (spec.rfind(prefix, 0) == 0) {
        std::string rest = spec.substr(prefix.size());
        if (rest == "identity") return Surface::general_chart([](const Vec2&) { return Mat2::Identity(); });
        if (rest == "stereographic") {
            return Surface::general_chart(
                [](const Vec2& p) {
                    double f = 2.0 / (1.0 + p.squaredNorm());
                    return Mat2(f * f * Mat2::Identity());
                },
                [](const Vec2& p) { return conformal_christoffel(-2.0 * p / (1.0 + p.squaredNorm())); });
        }
        if (rest == "poincare") {
            GeneralChartOptions o;
            o.domain_radius = 1.0;
            return Surface::general_chart(hyperbolic_metric, {}, o);
        }
        if (rest.rfind("diag=", 0) == 0) {
            double a = 0.0, b = 0.0;
            char comma = 0;
            std::istringstream is(rest.substr(5));
            if (!(is >> a >> comma >> b) || comma != ',') throw InputError("bad diag metric spec: " + spec);
            return Surface::general_chart([a, b](const Vec2&) {
                Mat2 g;
                g << a, 0.0, 0.0, b;
                return g;
            });
        }
    }
    throw InputError("unknown surface spec: " + spec);
}

UnitTangent geodesic_flow(const Surface& s, const UnitTangent& u, double t) { return s.flow(u, t); }
double distance(const Surface& s, const Vec3& p, const Vec3& q) { return s.distance(p, q); }
double angle(const Surface& s, const Vec3& p, const Vec3& u, const Vec3& v) { return s.angle(p, u, v); }

double psi(const Surface& s, double r) {
    if (r < 0.0) throw InputError("psi: negative radius");
    switch (s.kind()) {
        case SurfaceKind::euclidean: return r;
        case SurfaceKind::sphere: return std::sin(r);
        case SurfaceKind::hyperbolic: return std::sinh(r);
        default: throw UnsupportedKindError("psi is defined on constant-curvature surfaces only");
    }
}

namespace {

// Velocity of phi -> exp_x(r (cos phi v + sin phi Jv)) at phi0, in model coordinates.
Vec3 exp_angular_velocity(const Surface& s, const UnitTangent& v, double r, double phi0) {
    Vec3 jv = s.left_normal(v.point, v.vector);
    auto at = [&](double phi) {
        return s.flow({v.point, std::cos(phi) * v.vector + std::sin(phi) * jv}, r).point;
    };
    Vec3 d;
    for (int c = 0; c < 3; ++c)
        d(c) = richardson_derivative([&](double phi) { return at(phi)(c); }, phi0, 1e-3, 3);
    return d;
}

UnitTangent any_axis(const Surface& s, const Vec3& center) {
    if (s.kind() == SurfaceKind::sphere) {
        Vec3 trial = std::abs(center.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
        return s.unit(center, trial);
    }
    return s.unit(center, Vec3::UnitX());
}

}  // namespace

double big_psi(const Surface& s, const UnitTangent& v, double r) {
    if (!(r >= 10.0 * s.integrator_step())) throw IllConditionedError("big_psi: radius below 10 integrator steps");
    Vec3 p = s.flow(v, r).point;
    return s.norm(p, exp_angular_velocity(s, v, r, 0.0)) / r;
}

double circle_circumference(const Surface& s, const Vec3& center, double r) {
    s.check_point(center);
    UnitTangent axis = any_axis(s, center);
    Vec3 jv = s.left_normal(center, axis.vector);
    const int m = 64;
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
        double phi = 2.0 * M_PI * j / m;
        UnitTangent dir{center, std::cos(phi) * axis.vector + std::sin(phi) * jv};
        Vec3 p = s.flow(dir, r).point;
        total += s.norm(p, exp_angular_velocity(s, dir, r, 0.0));
    }
    return total * 2.0 * M_PI / m;
}

Chart::Chart(Surface surface, UnitTangent axis) : surface_(std::move(surface)), axis_(std::move(axis)) {
    surface_.check_point(axis_.point);
    axis_ = surface_.unit(axis_.point, axis_.vector);
    e2_ = surface_.left_normal(axis_.point, axis_.vector);
}

Vec2 Chart::to_chart(const Vec3& p) const {
    double d = surface_.distance(axis_.point, p);
    if (d == 0.0) return Vec2::Zero();
    Vec3 w = surface_.toward(axis_.point, p).vector;
    return d * Vec2(surface_.inner(axis_.point, w, axis_.vector), surface_.inner(axis_.point, w, e2_));
}

Vec3 Chart::from_chart(const Vec2& xi) const {
    double r = xi.norm();
    if (r == 0.0) return axis_.point;
    Vec3 dir = (xi.x() * axis_.vector + xi.y() * e2_) / r;
    return surface_.flow({axis_.point, dir}, r).point;
}

Mat2 Chart::metric(const Vec2& xi, double h) const {
    Vec3 p = from_chart(xi);
    Vec3 d[2];
    for (int i = 0; i < 2; ++i) {
        Vec2 e = Vec2::Zero();
        e(i) = h;
        d[i] = (from_chart(xi + e) - from_chart(xi - e)) / (2.0 * h);
    }
    Mat2 g;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g(i, j) = surface_.inner(p, d[i], d[j]);
    return g;
}

Chart normal_chart(const Surface& s, const UnitTangent& axis) { return Chart(s, axis); }

}  // namespace caustica
