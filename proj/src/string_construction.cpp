#include "caustica/string_construction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "caustica/numerics.hpp"

namespace caustica {

StringMethod parse_string_method(const std::string& name) {
    if (name == "pair-rootfind" || name == "pair_rootfind") return StringMethod::pair_rootfind;
    if (name == "bisector-ode" || name == "bisector_ode") return StringMethod::bisector_ode;
    throw InputError("unknown string method '" + name + "' (pair-rootfind | bisector-ode)");
}

double string_map(const ConvexCurve& curve, double p, double s_a) {
    if (!(p > 0.0)) throw DomainError("string parameter p must be positive");
    // the seed only needs the right scale; flat points fall back to kappa_max
    const double kappa = std::max(curve.signed_curvature(s_a), 1e-3 * curve.kappa_max());
    const double seed = std::cbrt(12.0 * p / (kappa * kappa));
    const double room = curve.closed() ? curve.length() : curve.length() - s_a;
    auto g = [&](double d) { return curve.string_length(s_a, s_a + d) - p; };
    auto too_far = [&](const char* why) {
        std::ostringstream os;
        os << "no string partner for p = " << p << " at s = " << s_a << ": " << why;
        return RangeError(os.str());
    };

    // separations beyond the turning cap count as too long while shrinking
    auto g_shrink = [&](double d) {
        try {
            return g(d);
        } catch (const RangeError&) {
            return HUGE_VAL;
        }
    };
    double lo = std::min(seed, 0.5 * room), glo = g_shrink(lo);
    for (int i = 0; glo > 0.0; ++i) {
        if (i > 60) throw IllConditionedError("string partner closer than 1e-8");
        lo *= 0.5;
        glo = g_shrink(lo);
    }
    double hi = lo, ghi = glo;
    while (ghi < 0.0) {
        lo = hi;
        glo = ghi;
        hi *= 1.5;
        if (hi > room) throw too_far("the curve ends first");
        try {
            ghi = g(hi);
        } catch (const RangeError&) {
            throw too_far("the tangent geodesics turn too far");
        }
    }
    return s_a + solve_bracketed(g, lo, hi, glo, ghi);
}

namespace {

StringSample rootfind_sample(const ConvexCurve& curve, double p, double s_a) {
    StringSample out;
    out.s_a = s_a;
    out.s_b = string_map(curve, p, s_a);
    out.c = curve.tangent_intersection(s_a, out.s_b).point;
    out.residual = curve.string_length(s_a, out.s_b) - p;
    return out;
}

std::pair<double, double> anchor_range(const ConvexCurve& curve, const StringOptions& opts) {
    double lo = opts.s_begin.value_or(0.0);
    double hi = opts.s_end.value_or(curve.closed() ? curve.length() : 0.5 * curve.length());
    if (!(hi > lo)) throw DomainError("empty anchor range");
    return {lo, hi};
}

Vec3 step_point(const Surface& s, const Vec3& c, const Vec3& v, double h) {
    Vec3 x = c + h * v;
    if (s.kind() == SurfaceKind::sphere) x.normalize();
    return x;
}

}  // namespace

UnitTangent bisector_direction(const ConvexCurve& curve, const Vec3& c) {
    const Surface& s = curve.surface();
    auto [sa, sb] = curve.tangency_points(c);
    Vec3 ua = s.toward(c, curve.point(sa)).vector;
    Vec3 ub = s.toward(c, curve.point(sb)).vector;
    return s.unit(c, ub - ua);
}

StringCurve string_curve(const ConvexCurve& curve, double p, StringMethod method, const StringOptions& opts) {
    if (opts.samples < 2) throw DomainError("string curve needs at least two samples");
    auto [lo, hi] = anchor_range(curve, opts);
    StringCurve out;
    out.p = p;
    out.method = method;
    if (method == StringMethod::pair_rootfind) {
        const int n = opts.samples;
        const double span = hi - lo;
        const bool wrap = curve.closed() && !opts.s_end;
        out.samples = parallel_map<StringSample>(n, [&](int i) {
            double s = lo + span * i / (wrap ? n : n - 1);
            return rootfind_sample(curve, p, s);
        });
        return out;
    }

    // Integrate the exterior-bisector field from a root-found seed.
    const Surface& surf = curve.surface();
    const double h = opts.ode_step;
    const int steps = std::max(1, int(std::lround(opts.ode_span / h)));
    Vec3 c = rootfind_sample(curve, p, lo).c;
    auto field = [&](const Vec3& x) { return bisector_direction(curve, x).vector; };
    std::vector<Vec3> points{c};
    for (int i = 0; i < steps; ++i) {
        Vec3 k1 = field(c);
        Vec3 k2 = field(step_point(surf, c, k1, 0.5 * h));
        Vec3 k3 = field(step_point(surf, c, k2, 0.5 * h));
        Vec3 k4 = field(step_point(surf, c, k3, h));
        c = step_point(surf, c, (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0, h);
        points.push_back(c);
    }
    out.samples = parallel_map<StringSample>(int(points.size()), [&](int i) {
        StringSample smp;
        smp.c = points[i];
        std::tie(smp.s_a, smp.s_b) = curve.tangency_points(points[i]);
        smp.residual = curve.string_length(smp.s_a, smp.s_b) - p;
        return smp;
    });
    std::vector<double> gaps = parallel_map<double>(int(points.size()), [&](int i) {
        StringSample ref = rootfind_sample(curve, p, out.samples[i].s_a);
        return surf.distance(ref.c, points[i]);
    });
    out.method_gap = *std::max_element(gaps.begin(), gaps.end());
    return out;
}

ConvexCurve string_curve_as_curve(const ConvexCurve& parent, const StringCurve& g) {
    if (!parent.closed()) throw DomainError("string curve interpolation needs a closed parent");
    const int n = int(g.samples.size());
    if (n < 8) throw DomainError("too few string samples to interpolate");
    const double period = parent.length();
    for (int i = 0; i < n; ++i)
        if (std::abs(g.samples[i].s_a - period * i / n) > 1e-9 * period)
            throw DomainError("string samples are not uniform over the whole curve");
    std::vector<Vec3> pts;
    for (const auto& smp : g.samples) pts.push_back(smp.c);
    return make_interpolated_curve(parent.surface(), pts, period, "string curve");
}

PoritskyReport poritsky_check(const ConvexCurve& curve, const std::vector<double>& p_list, int n_samples,
                              double tolerance) {
    if (n_samples < 2) throw DomainError("Poritsky check needs at least two samples");
    PoritskyReport rep;
    rep.tolerance = tolerance;
    rep.pass = true;
    const double len = curve.closed() ? curve.length() : 0.5 * curve.length();
    for (double p : p_list) {
        std::vector<double> inc = parallel_map<double>(n_samples, [&](int i) {
            double sa = len * i / (curve.closed() ? n_samples : n_samples - 1);
            double sb = string_map(curve, p, sa);
            return curve.lazutkin_parameter(sb, true) - curve.lazutkin_parameter(sa, true);
        });
        double mean = 0.0;
        for (double v : inc) mean += v;
        mean /= double(inc.size());
        double dev = 0.0;
        for (double v : inc) dev = std::max(dev, std::abs(v - mean));
        rep.p.push_back(p);
        rep.c_p.push_back(mean);
        rep.max_deviation.push_back(dev);
        rep.pass = rep.pass && dev < tolerance;
    }
    return rep;
}

PoritskyOrbit string_orbit(const ConvexCurve& curve, double p, double s_start, int max_steps) {
    PoritskyOrbit o;
    o.s.push_back(s_start);
    const double end = curve.closed() ? s_start + curve.length() : curve.length();
    while (int(o.s.size()) <= max_steps) {
        double next;
        try {
            next = string_map(curve, p, o.s.back());
        } catch (const RangeError&) {
            if (curve.closed()) throw;
            break;
        }
        o.s.push_back(next);
        if (next >= end) break;
    }
    const int n = int(o.s.size());
    if (n < 3) throw DomainError("string orbit too short to compare");
    std::vector<double> m(n);
    o.t.resize(n);
    for (int i = 0; i < n; ++i) {
        m[i] = i;
        o.t[i] = curve.lazutkin_parameter(o.s[i], true);
    }
    LineFit fit = fit_line(m, o.t);
    o.slope = fit.slope;
    o.intercept = fit.intercept;
    for (int i = 0; i < n; ++i) o.max_affine_error = std::max(o.max_affine_error, std::abs(fit.slope * i + fit.intercept - o.t[i]));
    for (int i = 1; i + 1 < n; ++i)
        o.max_second_difference = std::max(o.max_second_difference, std::abs(o.t[i + 1] - 2.0 * o.t[i] + o.t[i - 1]));
    double kl_min = 1e300, kl_max = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        double kl = std::cbrt(std::pow(curve.geodesic_curvature(o.s[i]), 2)) * (o.s[i + 1] - o.s[i]);
        kl_min = std::min(kl_min, kl);
        kl_max = std::max(kl_max, kl);
    }
    o.kappa_lambda_spread = kl_max / kl_min - 1.0;
    return o;
}

double lasyl_ratio(const ConvexCurve& curve, double s_a, double delta) {
    double k = curve.geodesic_curvature(s_a);
    return curve.string_length(s_a, s_a + delta) / (k * k * delta * delta * delta / 12.0);
}

}  // namespace caustica
