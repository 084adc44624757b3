#include "caustica/billiard_maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "caustica/numerics.hpp"

namespace caustica {

double y_of_phi(double phi) {
    double h = std::sin(0.5 * phi);
    return 2.0 * h * h;
}

double phi_of_y(double y) {
    if (y < 0.0 || y > 2.0) throw DomainError("y = 1 - cos(phi) must lie in [0, 2]");
    return 2.0 * std::asin(std::sqrt(0.5 * y));
}

namespace {

// Angle at P' between the curve tangent and the incoming chord direction d.
double incidence_angle(const ConvexCurve& curve, double s, const Vec3& d) {
    const Surface& surf = curve.surface();
    UnitTangent t = curve.tangent_geodesic(s);
    Vec3 n = surf.left_normal(t.point, t.vector);
    return std::atan2(-surf.inner(t.point, n, d), surf.inner(t.point, t.vector, d));
}

}  // namespace

PhasePoint chord_step(const ConvexCurve& curve, const PhasePoint& q) {
    if (!(q.phi > 0.0 && q.phi < M_PI)) throw DomainError("chord angle must lie in (0, pi)");
    const Surface& surf = curve.surface();
    const double s = q.s;
    const double len = curve.length();
    UnitTangent t = curve.tangent_geodesic(s);
    Vec3 n = surf.left_normal(t.point, t.vector);
    UnitTangent g{t.point, std::cos(q.phi) * t.vector + std::sin(q.phi) * n};
    auto f = [&](double sigma) { return surf.side(g, curve.point(sigma)); };

    // Points just ahead of s lie right of the chord (f < 0), points just behind
    // lie left (f > 0); the exit is the single sign change in between.
    const double kappa = std::max(curve.signed_curvature(s), 1e-3 * curve.kappa_max());
    const double small = std::min(q.phi, M_PI - q.phi);
    const double guess = std::min(2.0 * small / kappa, 0.25 * len);
    const double step = std::min(0.25 * guess, len / 64.0);
    double root;
    if (q.phi <= 0.5 * M_PI || !curve.closed()) {
        double a = s + step, fa = f(a);
        for (int i = 0; fa >= 0.0 && i < 60; ++i) {
            a = s + 0.5 * (a - s);
            fa = f(a);
        }
        const double end = curve.closed() ? s + len : len;
        for (;;) {
            double b = std::min(a + step, end);
            if (b <= a) throw GeometryError("chord leaves the curve's domain");
            double fb = f(b);
            if (fb > 0.0) {
                root = solve_bracketed(f, a, b, fa, fb);
                break;
            }
            a = b;
            fa = fb;
        }
    } else {
        double b = s + len - step, fb = f(b);
        for (int i = 0; fb <= 0.0 && i < 60; ++i) {
            b = s + len - 0.5 * (s + len - b);
            fb = f(b);
        }
        for (;;) {
            double a = b - step;
            if (a <= s) throw GeometryError("no chord exit found");
            double fa = f(a);
            if (fa < 0.0) {
                root = solve_bracketed(f, a, b, fa, fb);
                break;
            }
            b = a;
            fb = fa;
        }
    }
    Vec3 p1 = curve.point(root);
    Vec3 d = -surf.toward(p1, t.point).vector;
    return {root, incidence_angle(curve, root, d)};
}

PhasePoint billiard_step(const ConvexCurve& curve, const PhasePoint& q) { return chord_step(curve, q); }

PhasePoint billiard_beta(const ConvexCurve& curve, const PhasePoint& q) {
    PhasePoint r = chord_step(curve, q);
    return {r.s, M_PI - r.phi};
}

UnitTangent reflect(const ConvexCurve& curve, const UnitTangent& g) {
    const Surface& surf = curve.surface();
    std::vector<CurveCrossing> hits = curve.crossings(g);
    auto ahead = std::find_if(hits.begin(), hits.end(), [](const CurveCrossing& c) { return c.position > 1e-12; });
    if (ahead == hits.end()) throw GeometryError("geodesic does not hit the curve");
    const double s = ahead->s;
    UnitTangent t = curve.tangent_geodesic(s);
    Vec3 d = -surf.toward(t.point, g.point).vector;
    Vec3 n = surf.left_normal(t.point, t.vector);
    double dn = surf.inner(t.point, d, n);
    if (std::abs(dn) < 1e-12) throw GeometryError("geodesic hits the curve tangentially");
    return {t.point, d - 2.0 * dn * n};
}

WeaklyBilliardMap billiard_map_sy(const ConvexCurve& curve) {
    WeaklyBilliardMap f;
    f.forward = [curve](double x, double y) -> std::pair<double, double> {
        if (y <= 0.0) return {x, 0.0};
        PhasePoint r = chord_step(curve, PhasePoint::from_y(x, y));
        return {r.s, y_of_phi(r.phi)};
    };
    f.w = [curve](double x) { return 2.0 * std::sqrt(2.0) / curve.geodesic_curvature(x); };
    f.w_prime = [curve](double x) {
        double k = curve.geodesic_curvature(x);
        double dk = richardson_derivative([&](double z) { return curve.signed_curvature(z); }, x, 1e-3);
        return -2.0 * std::sqrt(2.0) * dk / (k * k);
    };
    f.x_lo = 0.0;
    f.x_hi = curve.length();
    f.y_max = 0.1;
    return f;
}

WeaklyBilliardMap translation_map() {
    WeaklyBilliardMap f;
    f.forward = [](double x, double y) -> std::pair<double, double> { return {x + std::sqrt(std::max(y, 0.0)), y}; };
    f.w = [](double) { return 1.0; };
    f.w_prime = [](double) { return 0.0; };
    f.x_lo = -HUGE_VAL;
    f.x_hi = HUGE_VAL;
    f.y_max = HUGE_VAL;
    return f;
}

Jacobian2 jacobian(const WeaklyBilliardMap& f, double x, double y) {
    if (!(y > 0.0)) throw DomainError("Jacobian needs y > 0");
    const double hx = 1e-3, hy = 0.05 * y;
    Jacobian2 j;
    j.a = richardson_derivative([&](double z) { return f.forward(z, y).first; }, x, hx);
    j.c = richardson_derivative([&](double z) { return f.forward(z, y).second; }, x, hx);
    j.b = richardson_derivative([&](double z) { return f.forward(x, z).first; }, y, hy);
    j.d = richardson_derivative([&](double z) { return f.forward(x, z).second; }, y, hy);
    return j;
}

LazutkinChart::LazutkinChart(std::function<double(double)> w, double x0) : w_(std::move(w)) {
    auto w_fn = w_;
    auto density = [w_fn](double z) { return 1.0 / std::cbrt(w_fn(z) * w_fn(z)); };
    x_of_ = [density, x0](double x) {
        int panels = 1 + int(std::abs(x - x0) / 0.05);
        return integrate_gl<20>(density, x0, x, panels);
    };
    auto xf = x_of_;
    inverse_ = [xf, density, x0](double X) {
        auto g = [&](double x) { return xf(x) - X; };
        double guess = X / density(x0);
        double a = x0, fa = g(a);
        if (fa == 0.0) return a;
        double b = x0 + (guess == 0.0 ? 1e-3 : guess), fb = g(b);
        for (int i = 0; (fa > 0.0) == (fb > 0.0); ++i) {
            if (i > 60) throw ConvergenceError("Lazutkin chart inverse not bracketed");
            a = b;
            fa = fb;
            b = x0 + 2.0 * (b - x0);
            fb = g(b);
        }
        return a < b ? solve_bracketed(g, a, b, fa, fb) : solve_bracketed(g, b, a, fb, fa);
    };
}

LazutkinChart LazutkinChart::for_billiard(const ConvexCurve& curve) {
    LazutkinChart c;
    c.w_ = [curve](double x) { return 2.0 * std::sqrt(2.0) / curve.geodesic_curvature(x); };
    c.x_of_ = [curve](double x) { return 0.5 * curve.lazutkin_parameter(x); };
    c.inverse_ = [curve](double X) { return curve.lazutkin_inverse(2.0 * X); };
    return c;
}

double LazutkinChart::Y(double x, double y) const {
    double w = w_(x);
    return std::cbrt(w * w) * y;
}

std::pair<double, double> LazutkinChart::inverse(double X, double Y) const {
    double x = x_of(X);
    double w = w_(x);
    return {x, Y / std::cbrt(w * w)};
}

NormalFormReport normal_form_check(const WeaklyBilliardMap& f, const LazutkinChart& chart, double x, double Y_lo,
                                   double Y_hi, int n) {
    if (n < 12) throw InputError("normal form fit needs at least 12 samples");
    NormalFormReport r;
    r.Y = logspace(Y_lo, Y_hi, n);
    const double X0 = chart.X(x);
    std::vector<double> ly, ldx, sqrt_y, f2;
    bool dy_nonzero = true;
    for (double Y : r.Y) {
        auto [x0, y0] = chart.inverse(X0, Y);
        auto [x1, y1] = f.forward(x0, y0);
        auto [X1, Y1] = chart.forward(x1, y1);
        r.dX.push_back(X1 - X0);
        r.dY.push_back(Y1 - Y);
        ly.push_back(std::log(Y));
        ldx.push_back(std::log(X1 - X0));
        r.max_dY_ratio = std::max(r.max_dY_ratio, std::abs(Y1 - Y) / std::pow(Y, 1.5));
        dy_nonzero = dy_nonzero && std::abs(Y1 - Y) > 1e-13 * Y;
        sqrt_y.push_back(std::sqrt(y0));
        f2.push_back((y1 - y0) / std::pow(y0, 1.5));
    }
    LineFit fit = fit_line(ly, ldx);
    r.slope = fit.slope;
    r.coefficient = std::exp(fit.intercept);
    if (dy_nonzero) {
        std::vector<double> ldy;
        for (double d : r.dY) ldy.push_back(std::log(std::abs(d)));
        r.dY_exponent = fit_line(ly, ldy).slope;
    } else {
        r.dY_exponent = std::numeric_limits<double>::quiet_NaN();
    }
    r.f2_coefficient = fit_line(sqrt_y, f2).intercept;
    r.f2_predicted = -2.0 / 3.0 * f.w_prime(chart.inverse(X0, Y_lo).first);
    return r;
}

OrbitRecord orbit(const WeaklyBilliardMap& f, const LazutkinChart& chart, double X0, double Y0, double delta,
                  long budget) {
    if (X0 > delta) throw DomainError("orbit start lies beyond delta");
    OrbitRecord o;
    auto [x, y] = chart.inverse(X0, Y0);
    o.X.push_back(X0);
    o.Y.push_back(Y0);
    for (long j = 1;; ++j) {
        if (j > budget) {
            o.capped = true;
            break;
        }
        auto [x1, y1] = f.forward(x, y);
        if (x1 == x && y1 == y) {
            // a fixed point stays in the box for ever
            o.m = budget;
            o.capped = true;
            break;
        }
        double X = chart.X(x1), Y = chart.Y(x1, y1);
        if (X > delta) break;
        o.X.push_back(X);
        o.Y.push_back(Y);
        o.m = j;
        x = x1;
        y = y1;
    }
    return o;
}

PlogStats plog_bounds_check(const OrbitRecord& o) {
    if (o.X.empty()) throw InputError("empty orbit");
    PlogStats st;
    st.m = o.m;
    const double y0 = o.Y[0];
    const double root = std::sqrt(y0);
    for (std::size_t j = 1; j < o.X.size(); ++j) {
        st.alpha = std::max(st.alpha, std::abs(std::log(o.Y[j] / y0)));
        double stepd = o.X[j] - o.X[j - 1];
        double cum = o.X[j] - o.X[0];
        if (!(stepd > 0.0) || !(cum > 0.0)) {
            st.beta = HUGE_VAL;
            continue;
        }
        st.beta = std::max({st.beta, std::abs(std::log(stepd / root)), std::abs(std::log(cum / (double(j) * root)))});
    }
    return st;
}

bool plog_bands_hold(const OrbitRecord& o, double beta) {
    const double root = std::sqrt(o.Y[0]);
    const double lo = std::exp(-beta) * root, hi = std::exp(beta) * root;
    for (std::size_t j = 1; j < o.X.size(); ++j) {
        double stepd = o.X[j] - o.X[j - 1], cum = o.X[j] - o.X[0];
        if (stepd < lo || stepd > hi) return false;
        if (cum < double(j) * lo || cum > double(j) * hi) return false;
    }
    return true;
}

}  // namespace caustica
