#include "caustica/convex_curve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "caustica/numerics.hpp"

namespace caustica {

namespace {

constexpr int kSpeed = 0;
constexpr int kLazutkin = 1;
constexpr int kTurning = 2;
constexpr int kAffine = 3;

}  // namespace

ConvexCurve::ConvexCurve(Surface surface, std::shared_ptr<const CurveModel> model, CurveOptions opts)
    : surface_(std::move(surface)), model_(std::move(model)), opts_(opts) {
    if (!model_) throw ConstructionError("curve needs a model");
    if (!(model_->u_max > model_->u_min)) throw ConstructionError("empty parameter domain");
    if (opts_.panels < 1) throw ConstructionError("panels must be positive");

    auto t = std::make_shared<Tables>();
    const int n = opts_.panels;
    t->knots.resize(n + 1);
    for (int i = 0; i <= n; ++i) t->knots[i] = model_->u_min + (model_->u_max - model_->u_min) * double(i) / n;
    t->knots[n] = model_->u_max;

    // convexity probe
    double kmax = 0.0, kmin = 1e300;
    for (int i = 0; i < opts_.convexity_probes; ++i) {
        double u = model_->u_min + (model_->u_max - model_->u_min) * (i + 0.5) / opts_.convexity_probes;
        double k = kappa_at(u);
        kmax = std::max(kmax, k);
        kmin = std::min(kmin, k);
    }
    if (!(kmax > 0.0) || kmin < -1e-9 * kmax) {
        std::ostringstream os;
        os << "curve '" << model_->description << "' is not convex: geodesic curvature reaches " << kmin;
        throw ConvexityError(os.str());
    }
    t->kappa_max = kmax;

    t->cum_s.assign(n + 1, 0.0);
    t->cum_lz.assign(n + 1, 0.0);
    t->cum_tn.assign(n + 1, 0.0);
    t->cum_af.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        double a = t->knots[i], b = t->knots[i + 1];
        t->cum_s[i + 1] = t->cum_s[i] + integrate_gl<20>([&](double u) { return integrand(kSpeed, u); }, a, b);
        t->cum_lz[i + 1] = t->cum_lz[i] + integrate_gl<20>([&](double u) { return integrand(kLazutkin, u); }, a, b);
        t->cum_tn[i + 1] = t->cum_tn[i] + integrate_gl<20>([&](double u) { return integrand(kTurning, u); }, a, b);
        t->cum_af[i + 1] = t->cum_af[i] + integrate_gl<20>([&](double u) { return integrand(kAffine, u); }, a, b);
    }
    tables_ = t;

    double u0 = opts_.base_parameter.value_or(0.5 * (model_->u_min + model_->u_max));
    s0_ = natural_length(u0);
    kappa0_ = kappa_at(u0);
    if (!(kappa0_ > 0.0)) throw ConvexityError("geodesic curvature vanishes at the normalization point");
    lz0_ = cumulative(tables_->cum_lz, kLazutkin, u0);
}

double ConvexCurve::speed(double u) const {
    auto d = model_->eval1(u);
    return surface_.norm(d[0], d[1]);
}

double ConvexCurve::kappa_at(double u) const {
    auto d = model_->eval2(u);
    return surface_.geodesic_curvature(d[0], d[1], d[2]);
}

double ConvexCurve::integrand(int which, double u) const {
    auto d = model_->eval2(u);
    double v = surface_.norm(d[0], d[1]);
    if (which == kSpeed) return v;
    double k = std::max(0.0, surface_.geodesic_curvature(d[0], d[1], d[2]));
    switch (which) {
        case kLazutkin: return std::cbrt(k * k) * v;
        case kAffine: return std::cbrt(k) * v;
        default: return k * v;
    }
}

double ConvexCurve::cumulative(const std::vector<double>& table, int which, double u) const {
    const auto& knots = tables_->knots;
    const double lo = model_->u_min, hi = model_->u_max, period = hi - lo;
    double shift = 0.0;
    if (model_->periodic) {
        double k = std::floor((u - lo) / period);
        u -= k * period;
        if (u >= hi) {
            u -= period;
            k += 1.0;
        }
        shift = k * table.back();
    } else if (u < lo - 1e-12 * period || u > hi + 1e-12 * period) {
        throw DomainError("curve parameter outside the domain");
    } else {
        u = std::clamp(u, lo, hi);
    }
    std::size_t i = std::upper_bound(knots.begin(), knots.end(), u) - knots.begin();
    i = std::clamp<std::size_t>(i, 1, knots.size() - 1) - 1;
    double part = u == knots[i] ? 0.0 : integrate_gl<20>([&](double x) { return integrand(which, x); }, knots[i], u);
    return shift + table[i] + part;
}

double ConvexCurve::invert(const std::vector<double>& table, int which, double value) const {
    const auto& knots = tables_->knots;
    const double total = table.back(), period = model_->u_max - model_->u_min;
    double shift = 0.0;
    if (model_->periodic) {
        double k = std::floor(value / total);
        value -= k * total;
        if (value >= total) {
            value -= total;
            k += 1.0;
        }
        shift = k * period;
    } else if (value < -1e-12 * total || value > total * (1.0 + 1e-12)) {
        throw DomainError("natural length outside the curve");
    } else {
        value = std::clamp(value, 0.0, total);
    }
    std::size_t i = std::upper_bound(table.begin(), table.end(), value) - table.begin();
    i = std::clamp<std::size_t>(i, 1, table.size() - 1) - 1;
    if (value == table[i]) return shift + knots[i];
    auto f = [&](double u) {
        return table[i] + integrate_gl<20>([&](double x) { return integrand(which, x); }, knots[i], u) - value;
    };
    double fa = table[i] - value, fb = table[i + 1] - value;
    if (fb == 0.0) return shift + knots[i + 1];
    return shift + solve_bracketed(f, knots[i], knots[i + 1], fa, fb);
}

double ConvexCurve::parameter(double s) const { return invert(tables_->cum_s, kSpeed, s); }

double ConvexCurve::natural_length(double u) const { return cumulative(tables_->cum_s, kSpeed, u); }

double ConvexCurve::arc_length(double ua, double ub) const {
    if (ua == ub) return 0.0;
    if (std::abs(ub - ua) < (model_->u_max - model_->u_min) / opts_.panels)
        return integrate_gl<20>([&](double x) { return speed(x); }, ua, ub);
    return natural_length(ub) - natural_length(ua);
}

Vec3 ConvexCurve::point(double s) const { return model_->eval1(parameter(s))[0]; }

std::array<Vec3, 6> ConvexCurve::derivatives(double s) const { return model_->eval5(parameter(s)); }

UnitTangent ConvexCurve::tangent_geodesic(double s) const {
    auto d = model_->eval1(parameter(s));
    return surface_.unit(d[0], d[1]);
}

Vec3 ConvexCurve::left_normal(double s) const {
    UnitTangent t = tangent_geodesic(s);
    return surface_.left_normal(t.point, t.vector);
}

double ConvexCurve::signed_curvature(double s) const { return kappa_at(parameter(s)); }

double ConvexCurve::geodesic_curvature(double s) const {
    double k = signed_curvature(s);
    if (!(k > 0.0)) {
        std::ostringstream os;
        os << "geodesic curvature " << k << " <= 0 at s = " << s;
        throw ConvexityError(os.str());
    }
    return k;
}

double ConvexCurve::turning(double sa, double sb) const {
    return cumulative(tables_->cum_tn, kTurning, parameter(sb)) - cumulative(tables_->cum_tn, kTurning, parameter(sa));
}

double ConvexCurve::affine_length(double s) const { return cumulative(tables_->cum_af, kAffine, parameter(s)); }

double ConvexCurve::affine_inverse(double a) const { return natural_length(invert(tables_->cum_af, kAffine, a)); }

double ConvexCurve::lazutkin_parameter(double s, bool normalized) const {
    double t = cumulative(tables_->cum_lz, kLazutkin, parameter(s)) - lz0_;
    return normalized ? std::cbrt(kappa0_) * t : t;
}

double ConvexCurve::lazutkin_inverse(double t, bool normalized) const {
    double raw = normalized ? t / std::cbrt(kappa0_) : t;
    return natural_length(invert(tables_->cum_lz, kLazutkin, raw + lz0_));
}

Crossing ConvexCurve::tangent_intersection(double s_a, double s_b) const {
    if (std::abs(s_a - s_b) < 1e-8) throw IllConditionedError("tangency points closer than 1e-8");
    double turn = std::abs(turning(s_a, s_b));
    if (turn > opts_.max_turning) {
        std::ostringstream os;
        os << "tangency points too far apart: total turning " << turn << " exceeds " << opts_.max_turning;
        throw RangeError(os.str());
    }
    auto c = surface_.intersect(tangent_geodesic(s_a), tangent_geodesic(s_b));
    if (!c) throw GeometryError("tangent geodesics do not intersect");
    return *c;
}

double ConvexCurve::string_length(double s_a, double s_b) const {
    Crossing c = tangent_intersection(s_a, s_b);
    return std::abs(c.time_a) + std::abs(c.time_b) - std::abs(s_b - s_a);
}

double ConvexCurve::lambda_defect(double t) const {
    double sp = lazutkin_inverse(t, true);
    double sm = lazutkin_inverse(-t, true);
    return string_length(s0_, sp) - string_length(sm, s0_);
}

double ConvexCurve::closest_point(const Vec3& q) const {
    const int m = 256;
    const double lo = model_->u_min, hi = model_->u_max;
    const double step = (hi - lo) / (closed() ? m : m - 1);
    auto dist = [&](double u) { return surface_.distance(model_->eval1(u)[0], q); };
    int best = 0;
    double bd = 1e300;
    for (int i = 0; i < m; ++i) {
        double d = dist(lo + i * step);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    double a = lo + (best - 1) * step, b = lo + (best + 1) * step;
    if (!closed()) {
        a = std::max(a, lo);
        b = std::min(b, hi);
    }
    double u = minimize_brent(dist, a, b);
    double s = natural_length(u);
    if (closed()) s -= std::floor(s / length()) * length();
    return s;
}

std::pair<double, double> ConvexCurve::tangency_points(const Vec3& q) const {
    const double sc = closest_point(q);
    if (surface_.distance(point(sc), q) < 1e-12) throw DomainError("point lies on the curve");
    auto f = [&](double s) { return surface_.side(tangent_geodesic(s), q); };
    const double fc = f(sc);
    if (fc >= 0.0) throw DomainError("point lies inside the curve");
    const double len = length();
    const double step = len / 256.0;
    auto walk = [&](double dir) {
        double s0 = sc, f0 = fc;
        for (int i = 1; i <= 256; ++i) {
            double s1 = sc + dir * i * step;
            if (!closed() && (s1 < 0.0 || s1 > len)) break;
            double f1 = f(s1);
            if (f1 >= 0.0) return dir > 0 ? solve_bracketed(f, s0, s1, f0, f1) : solve_bracketed(f, s1, s0, f1, f0);
            s0 = s1;
            f0 = f1;
        }
        throw GeometryError("no tangent geodesic from the point touches the curve");
    };
    double sa = walk(-1.0), sb = walk(1.0);
    return {sa, sb};
}

std::vector<CurveCrossing> ConvexCurve::crossings(const UnitTangent& g) const {
    const int m = 256;
    const double lo = model_->u_min, hi = model_->u_max;
    auto f = [&](double u) { return surface_.side(g, model_->eval1(u)[0]); };
    std::vector<double> roots;
    double u0 = lo, f0 = f(u0);
    const double f_lo = f0;
    const int count = closed() ? m : m - 1;
    for (int i = 1; i <= count; ++i) {
        // the end of a closed domain is its start: reuse the value so that a
        // crossing at the seam is counted exactly once
        double u1 = lo + (hi - lo) * i / count, f1 = closed() && i == count ? f_lo : f(u1);
        if (f0 == 0.0)
            roots.push_back(u0);
        else if ((f0 > 0.0) != (f1 > 0.0) && f1 != 0.0)
            roots.push_back(solve_bracketed(f, u0, u1, f0, f1));
        u0 = u1;
        f0 = f1;
    }
    if (!closed() && f0 == 0.0) roots.push_back(u0);
    std::vector<CurveCrossing> out;
    for (double u : roots) out.push_back({natural_length(u), surface_.position_on(g, model_->eval1(u)[0])});
    std::sort(out.begin(), out.end(), [](const CurveCrossing& a, const CurveCrossing& b) { return a.position < b.position; });
    return out;
}

// ---------------------------------------------------------------- factories

ConvexCurve make_interpolated_curve(const Surface& surface, const std::vector<Vec3>& points, double period,
                                    const std::string& description) {
    const int n = int(points.size());
    if (n < 8) throw DomainError("too few points to interpolate a closed curve");
    curves::Fourier f;
    f.kind = surface.kind() == SurfaceKind::sphere ? 1 : 0;
    f.period = period;
    const int modes = (n - 1) / 2;
    for (int c = 0; c < 3; ++c) {
        f.cos_coef[c].assign(modes + 1, 0.0);
        f.sin_coef[c].assign(modes + 1, 0.0);
        for (int k = 0; k <= modes; ++k) {
            double ac = 0.0, as = 0.0;
            for (int i = 0; i < n; ++i) {
                double th = 2.0 * M_PI * double(k) * i / n;
                ac += points[i](c) * std::cos(th);
                as += points[i](c) * std::sin(th);
            }
            f.cos_coef[c][k] = (k == 0 ? 1.0 : 2.0) * ac / n;
            f.sin_coef[c][k] = 2.0 * as / n;
        }
    }
    CurveOptions opts;
    opts.base_parameter = 0.5 * period;
    return ConvexCurve(surface, make_model(f, 0.0, period, true, description), opts);
}

ConvexCurve make_circle(double r, Vec2 center, CurveOptions opts) {
    if (!(r > 0.0)) throw ConstructionError("circle radius must be positive");
    auto m = make_model(curves::Circle{r, center.x(), center.y()}, 0.0, 2.0 * M_PI, true, "circle");
    return ConvexCurve(Surface::euclidean(), m, opts);
}

ConvexCurve make_ellipse(double a, double b, CurveOptions opts) {
    if (!(a > 0.0 && b > 0.0)) throw ConstructionError("ellipse semi-axes must be positive");
    auto m = make_model(curves::Ellipse{a, b}, 0.0, 2.0 * M_PI, true, "ellipse");
    return ConvexCurve(Surface::euclidean(), m, opts);
}

ConvexCurve make_quartic_oval(double r, CurveOptions opts) {
    if (!(r > 0.0)) throw ConstructionError("quartic oval size must be positive");
    if (!opts.base_parameter) opts.base_parameter = M_PI / 4;
    auto m = make_model(curves::QuarticOval{r}, 0.0, 2.0 * M_PI, true, "quartic");
    return ConvexCurve(Surface::euclidean(), m, opts);
}

ConvexCurve make_geodesic_circle(const Surface& s, double r, CurveOptions opts) {
    if (!(r > 0.0)) throw ConstructionError("circle radius must be positive");
    switch (s.kind()) {
        case SurfaceKind::euclidean: return make_circle(r, Vec2::Zero(), opts);
        case SurfaceKind::sphere: {
            if (!(r < M_PI / 2)) throw ConstructionError("spherical circle radius must be below pi/2");
            double t = std::tan(r);
            return make_conic({SurfaceKind::sphere, Eigen::Vector3d(1, 1, -t * t).asDiagonal()}, std::nullopt, opts);
        }
        case SurfaceKind::hyperbolic: {
            double t = std::tanh(r);
            return make_conic({SurfaceKind::hyperbolic, Eigen::Vector3d(1, 1, -t * t).asDiagonal()}, std::nullopt,
                              opts);
        }
        default: throw UnsupportedKindError("geodesic circles need a constant-curvature surface");
    }
}

ConvexCurve make_graph(const Surface& s, const std::array<double, 6>& b, double half_width, CurveOptions opts) {
    curves::ChartGraph g{s.constant_curvature() ? s.model_sign() : 0, b};
    if (!(half_width > 0.0)) throw ConstructionError("graph half width must be positive");
    if (!opts.base_parameter) opts.base_parameter = 0.0;
    bool reversed = b[2] < 0.0;
    if (reversed) opts.base_parameter = -*opts.base_parameter;
    auto m = make_model(g, -half_width, half_width, false, "graph", reversed);
    return ConvexCurve(s, m, opts);
}

ConvexCurve make_conic(const ConicSpec& spec, std::optional<Vec3> base, CurveOptions opts) {
    Surface surf = spec.kind == SurfaceKind::euclidean ? Surface::euclidean()
                   : spec.kind == SurfaceKind::sphere  ? Surface::sphere()
                   : spec.kind == SurfaceKind::hyperbolic
                       ? Surface::hyperbolic()
                       : throw UnsupportedKindError("conics are defined on constant-curvature surfaces");
    const int k = surf.model_sign();
    Eigen::Matrix3d c = 0.5 * (spec.c + spec.c.transpose());
    const double cn = c.norm();
    if (!(cn > 0.0)) throw ConstructionError("zero conic matrix");
    auto q = [&](const Vec3& x) { return x.dot(c * x); };
    auto inside = [&](const Vec3& x) { return k >= 0 || (x.z() * x.z() - x.x() * x.x() - x.y() * x.y()) > 0.0; };

    Vec3 b;
    if (base) {
        surf.check_point(*base);
        b = surf.lift(*base);
    } else {
        // cross the conic with the geodesic through the model origin along e1
        Vec3 o(0, 0, 1), e(1, 0, 0);
        double qa = q(e), qb = 2.0 * o.dot(c * e), qc = q(o);
        std::vector<double> roots;
        if (std::abs(qa) < 1e-15 * cn) {
            if (std::abs(qb) > 0.0) roots.push_back(-qc / qb);
        } else {
            double disc = qb * qb - 4.0 * qa * qc;
            if (disc >= 0.0) {
                double sq = std::sqrt(disc);
                double r1 = (-qb - std::copysign(sq, qb)) / (2.0 * qa);
                roots.push_back(r1);
                if (r1 != 0.0) roots.push_back(qc / (qa * r1));
            }
        }
        std::sort(roots.begin(), roots.end(), std::greater<>());
        bool found = false;
        for (double t : roots) {
            Vec3 x = o + t * e;
            if (inside(x)) {
                b = x;
                found = true;
                break;
            }
        }
        if (!found) throw ConstructionError("conic does not meet the model along the first axis; give a base point");
        if (k > 0) b.normalize();
        if (k < 0) b /= std::sqrt(b.z() * b.z() - b.x() * b.x() - b.y() * b.y());
    }
    const double bn = b.norm();
    if (std::abs(q(b)) > 1e-9 * cn * bn * bn) throw ConstructionError("base point is not on the conic");
    Vec3 cb = c * b;
    if (cb.norm() < 1e-12 * cn * bn) throw ConstructionError("conic is singular at the base point");

    Vec3 bu = b / bn;
    Vec3 e1 = (std::abs(bu.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY());
    e1 = (e1 - e1.dot(bu) * bu).normalized();
    Vec3 e2 = bu.cross(e1);
    double th_b = std::atan2(-cb.dot(e1), cb.dot(e2));
    Vec3 pb = std::cos(th_b) * e1 + std::sin(th_b) * e2;
    double qpb = q(pb);
    if (std::abs(qpb) < 1e-12 * cn) throw ConstructionError("degenerate conic through the base point");

    curves::Conic f;
    f.kind = k;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) f.c[i][j] = c(i, j);
        f.base[i] = b(i);
        f.e1[i] = e1(i);
        f.e2[i] = e2(i);
    }
    f.sign = qpb < 0.0 ? 1.0 : -1.0;

    // the branch must stay inside the model for the whole period; in the plane
    // the homogeneous weight must keep its sign (no points at infinity)
    double w0 = 0.0;
    for (int i = 0; i < 720; ++i) {
        double th = th_b + M_PI * (i / 720.0 - 0.5);
        Vec3 p = std::cos(th) * e1 + std::sin(th) * e2;
        Vec3 x = f.sign * (-q(p) * b + 2.0 * cb.dot(p) * p);
        if (i == 0) w0 = x.z();
        bool ok = k == 0 ? x.z() * w0 > 0.0 && std::abs(x.z()) > 1e-12 * x.norm() : k > 0 || (inside(x) && x.z() > 0.0);
        if (!ok) throw ConstructionError("conic branch is not a closed curve inside the model");
    }

    auto probe = make_model(f, th_b - M_PI / 2, th_b + M_PI / 2, true, "conic");
    auto d = probe->eval2(th_b);
    bool reversed = surf.geodesic_curvature(d[0], d[1], d[2]) < 0.0;
    if (!opts.base_parameter) opts.base_parameter = reversed ? -th_b : th_b;
    auto m = make_model(f, th_b - M_PI / 2, th_b + M_PI / 2, true, "conic", reversed);
    return ConvexCurve(surf, m, opts);
}

// ---------------------------------------------------------------- mini-language

namespace {

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::string body = v;
    if (!body.empty() && body.front() == '[') body = body.substr(1);
    if (!body.empty() && body.back() == ']') body.pop_back();
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (item.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError("bad number '" + item + "' in curve key '" + key + "'");
        }
    }
    return out;
}

}  // namespace

ConvexCurve parse_curve(const std::string& spec) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::map<std::string, std::string> kv;
    if (colon != std::string::npos) {
        std::string rest = spec.substr(colon + 1);
        std::size_t i = 0;
        while (i < rest.size()) {
            std::size_t eq = rest.find('=', i);
            if (eq == std::string::npos) throw InputError("curve spec entry without '=': " + rest.substr(i));
            std::string key = rest.substr(i, eq - i);
            std::size_t j = eq + 1;
            int depth = 0;
            while (j < rest.size() && (depth > 0 || rest[j] != ',')) {
                if (rest[j] == '[') ++depth;
                if (rest[j] == ']') --depth;
                ++j;
            }
            kv[key] = rest.substr(eq + 1, j - eq - 1);
            i = j + 1;
        }
    }
    auto take = [&](const std::string& key, double def) {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        auto v = parse_list(key, it->second);
        if (v.size() != 1) throw InputError("curve key '" + key + "' needs one number");
        kv.erase(it);
        return v[0];
    };
    auto take_list = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) return std::vector<double>{};
        auto v = parse_list(key, it->second);
        kv.erase(it);
        return v;
    };
    std::string kind = "euclidean";
    if (auto it = kv.find("k"); it != kv.end()) {
        kind = it->second;
        kv.erase(it);
    }
    Surface surf = make_surface(kind);
    if (!surf.constant_curvature()) throw InputError("curve specs need a constant-curvature surface kind");

    auto finish = [&](ConvexCurve c) {
        if (!kv.empty()) throw InputError("unknown curve key '" + kv.begin()->first + "'");
        return c;
    };

    if (name == "circle") {
        double r = take("r", 1.0);
        if (surf.kind() == SurfaceKind::euclidean) {
            double cx = take("cx", 0.0), cy = take("cy", 0.0);
            return finish(make_circle(r, Vec2(cx, cy)));
        }
        return finish(make_geodesic_circle(surf, r));
    }
    if (name == "ellipse") {
        double a = take("a", 2.0), b = take("b", 1.0);
        if (surf.kind() == SurfaceKind::euclidean) return finish(make_ellipse(a, b));
        // ellipse with semi-axes a, b in the gnomonic / Klein chart
        return finish(make_conic({surf.kind(), Eigen::Vector3d(1.0 / (a * a), 1.0 / (b * b), -1.0).asDiagonal()}));
    }
    if (name == "quartic") {
        if (surf.kind() != SurfaceKind::euclidean) throw InputError("quartic oval is planar only");
        return finish(make_quartic_oval(take("r", 1.0)));
    }
    if (name == "conic") {
        auto c = take_list("c");
        Eigen::Matrix3d m;
        if (c.size() == 6) {
            m << c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5];
        } else if (c.size() == 9) {
            m << c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], c[8];
        } else {
            throw InputError("conic key 'c' needs 6 (upper triangle) or 9 entries");
        }
        auto base = take_list("base");
        std::optional<Vec3> b;
        if (!base.empty()) {
            if (base.size() != 3) throw InputError("conic key 'base' needs 3 entries");
            b = Vec3(base[0], base[1], base[2]);
        }
        return finish(make_conic({surf.kind(), m}, b));
    }
    if (name == "graph") {
        auto c = take_list("coeffs");
        if (c.size() != 5) throw InputError("graph key 'coeffs' needs b1..b5");
        std::array<double, 6> b{take("b0", 0.0), c[0], c[1], c[2], c[3], c[4]};
        double hw = take("range", 0.3);
        return finish(make_graph(surf, b, hw));
    }
    throw InputError("unknown curve type '" + name + "'");
}

}  // namespace caustica
