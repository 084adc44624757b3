#include "caustica/outer_billiards.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "caustica/numerics.hpp"

namespace caustica {

OuterStep outer_step(const ConvexCurve& gamma, const Vec3& a) {
    const Surface& surf = gamma.surface();
    surf.check_point(a);
    auto [sa, sb] = gamma.tangency_points(a);
    (void)sa;
    OuterStep r;
    r.s_tangency = sb;
    UnitTangent t = gamma.tangent_geodesic(sb);
    r.tangency = t.point;
    r.distance = surf.distance(a, t.point);
    r.image = surf.flow(t, r.distance).point;
    return r;
}

Vec3 outer_map(const ConvexCurve& gamma, const Vec3& a) { return outer_step(gamma, a).image; }

namespace {

int panels_for(const ConvexCurve& curve, double du) {
    const double span = curve.model().u_max - curve.model().u_min;
    return 1 + int(32.0 * std::abs(du) / span);
}

// F(x, y) = integral of the area density from x0 to x at height y, so that
// area = closed integral of F dy.
double green_potential(const Surface& surf, double x0, const Vec3& q) {
    return integrate_gl<20>([&](double x) { return surf.area_density(Vec3(x, q.y(), 0.0)); }, x0, q.x());
}

// Closed integral of F dy over the arc u1 -> u2 followed by the geodesic from
// the arc's end back to its start.
double green_region(const ConvexCurve& curve, double u1, double u2, bool with_chord) {
    const Surface& surf = curve.surface();
    const CurveModel& m = curve.model();
    const double x0 = m.eval1(u1)[0].x();
    double area = integrate_gl<20>(
        [&](double u) {
            auto d = m.eval1(u);
            return green_potential(surf, x0, d[0]) * d[1].y();
        },
        u1, u2, panels_for(curve, u2 - u1));
    if (with_chord) {
        Vec3 p2 = m.eval1(u2)[0], p1 = m.eval1(u1)[0];
        UnitTangent g = surf.toward(p2, p1);
        double len = surf.distance(p2, p1);
        area += integrate_gl<20>(
            [&](double tau) {
                UnitTangent q = surf.flow(g, tau);
                return green_potential(surf, x0, q.point) * q.vector.y();
            },
            0.0, len, 4);
    }
    return area;
}

}  // namespace

double cap_area(const ConvexCurve& curve, double s1, double s2) {
    if (!(s2 > s1)) throw DomainError("cap needs s2 > s1");
    if (curve.closed() && s2 - s1 >= curve.length()) throw DomainError("cap arc exceeds the curve");
    const Surface& surf = curve.surface();
    const double u1 = curve.parameter(s1), u2 = curve.parameter(s2);
    switch (surf.kind()) {
        case SurfaceKind::euclidean: {
            // 1/2 closed integral of (X - P1) x dX; the chord contributes nothing
            const CurveModel& m = curve.model();
            const Vec3 p1 = m.eval1(u1)[0];
            return 0.5 * integrate_gl<20>(
                             [&](double u) {
                                 auto d = m.eval1(u);
                                 Vec3 r = d[0] - p1;
                                 return r.x() * d[1].y() - r.y() * d[1].x();
                             },
                             u1, u2, panels_for(curve, u2 - u1));
        }
        case SurfaceKind::general_chart:
            return green_region(curve, u1, u2, true);
        default: {
            // Gauss-Bonnet for the region bounded by the arc and a geodesic
            const Vec3 p1 = curve.point(s1), p2 = curve.point(s2);
            const double alpha1 = surf.angle(p1, surf.toward(p1, p2).vector, curve.tangent_geodesic(s1).vector);
            const double alpha2 = surf.angle(p2, -curve.tangent_geodesic(s2).vector, surf.toward(p2, p1).vector);
            return (alpha1 + alpha2 - curve.turning(s1, s2)) / surf.curvature();
        }
    }
}

double enclosed_area(const ConvexCurve& curve) {
    if (!curve.closed()) throw DomainError("enclosed area needs a closed curve");
    const Surface& surf = curve.surface();
    const CurveModel& m = curve.model();
    switch (surf.kind()) {
        case SurfaceKind::euclidean:
            return 0.5 * integrate_gl<20>(
                             [&](double u) {
                                 auto d = m.eval1(u);
                                 return d[0].x() * d[1].y() - d[0].y() * d[1].x();
                             },
                             m.u_min, m.u_max, 64);
        case SurfaceKind::general_chart:
            return green_region(curve, m.u_min, m.u_max, false);
        default:
            return (2.0 * M_PI - curve.turning(0.0, curve.length())) / surf.curvature();
    }
}

double area_cut(const ConvexCurve& curve, const UnitTangent& g) {
    if (!curve.closed()) throw DomainError("area cut needs a closed curve");
    std::vector<CurveCrossing> hits = curve.crossings(g);
    if (hits.size() != 2) {
        std::ostringstream os;
        os << "geodesic crosses the curve " << hits.size() << " times, expected 2";
        throw GeometryError(os.str());
    }
    double s1 = hits[0].s, s2 = hits[1].s;
    if (s2 <= s1) s2 += curve.length();
    return cap_area(curve, s1, s2);
}

double area_map(const ConvexCurve& curve, double p, double s1) {
    if (!curve.closed()) throw DomainError("area map needs a closed curve");
    if (!(p > 0.0)) throw DomainError("area p must be positive");
    const double len = curve.length();
    // cap area ~ kappa lambda^3 / 12; flat points fall back to kappa_max
    const double kappa = std::max(curve.signed_curvature(s1), 1e-3 * curve.kappa_max());
    auto f = [&](double d) { return cap_area(curve, s1, s1 + d) - p; };
    double lo = std::min(std::cbrt(12.0 * p / kappa), 0.5 * len), flo = f(lo);
    for (int i = 0; flo > 0.0; ++i) {
        if (i > 60) throw IllConditionedError("area chord shorter than the resolution");
        lo *= 0.5;
        flo = f(lo);
    }
    double hi = lo, fhi = flo;
    while (fhi < 0.0) {
        lo = hi;
        flo = fhi;
        hi = std::min(1.5 * hi, len * (1.0 - 1e-9));
        if (hi <= lo) {
            std::ostringstream os;
            os << "no chord cuts off area " << p << " at s = " << s1;
            throw RangeError(os.str());
        }
        fhi = f(hi);
    }
    return s1 + solve_bracketed(f, lo, hi, flo, fhi);
}

AreaCurve area_construction(const ConvexCurve& curve, double p, const AreaOptions& opts) {
    if (!curve.closed()) throw DomainError("area construction needs a closed curve");
    if (opts.samples < 8) throw DomainError("area construction needs at least 8 samples");
    if (!(opts.envelope_step > 0.0 && opts.envelope_step < 0.5)) throw DomainError("envelope step must lie in (0, 0.5)");
    const double half = 0.5 * enclosed_area(curve);
    if (!(p > 0.0 && p < half)) throw DomainError("area p must lie in (0, half the enclosed area)");
    const Surface& surf = curve.surface();
    const double len = curve.length();
    const int n = opts.samples;

    auto chord = [&](double s1) { return surf.toward(curve.point(s1), curve.point(area_map(curve, p, s1))); };
    AreaCurve out;
    out.p = p;
    out.samples = parallel_map<AreaSample>(n, [&](int i) {
        AreaSample a;
        a.s1 = len * i / n;
        a.s2 = area_map(curve, p, a.s1);
        a.chord = surf.toward(curve.point(a.s1), curve.point(a.s2));
        a.chord_length = surf.distance(a.chord.point, curve.point(a.s2));
        a.area_residual = cap_area(curve, a.s1, a.s2) - p;
        // mean of the crossings with the chords at s1 -/+ h: O(h^2) accurate
        auto position = [&](double h) {
            auto lo = surf.intersect(a.chord, chord(a.s1 - h));
            auto hi = surf.intersect(a.chord, chord(a.s1 + h));
            if (!lo || !hi) throw GeometryError("neighbouring area chords do not cross");
            return 0.5 * (lo->time_a + hi->time_a);
        };
        const double h = opts.envelope_step * (a.s2 - a.s1);
        a.envelope_position = (4.0 * position(0.5 * h) - position(h)) / 3.0;
        a.envelope = surf.flow(a.chord, a.envelope_position).point;
        return a;
    });

    for (int i = 0; i < n; ++i) {
        const AreaSample& a = out.samples[i];
        const AreaSample& b = out.samples[(i + 1) % n];
        out.max_bisection_residual =
            std::max(out.max_bisection_residual, std::abs(a.envelope_position - 0.5 * a.chord_length));
        out.max_area_residual = std::max(out.max_area_residual, std::abs(a.area_residual));
        // a smooth convex envelope advances along each chord and stays on its left
        UnitTangent at_e{a.envelope, surf.flow(a.chord, a.envelope_position).vector};
        if (surf.side(at_e, b.envelope) <= 0.0 || surf.inner(a.envelope, at_e.vector, b.envelope - a.envelope) <= 0.0) {
            if (!out.degenerate) {
                std::ostringstream os;
                os << "degenerate envelope for p = " << p << ": cusp or backtracking near s = " << a.s1;
                out.warning = os.str();
            }
            out.degenerate = true;
        }
    }
    return out;
}

ConvexCurve area_curve_as_curve(const ConvexCurve& parent, const AreaCurve& g) {
    std::vector<Vec3> pts;
    for (const auto& a : g.samples) pts.push_back(a.envelope);
    return make_interpolated_curve(parent.surface(), pts, parent.length(), "area curve");
}

HomothetyFit homothety_fit(const ConvexCurve& parent, const AreaCurve& g, const Vec2& center) {
    if (parent.surface().kind() != SurfaceKind::euclidean) throw UnsupportedKindError("homothety fit is planar");
    const Vec3 c(center.x(), center.y(), 0.0);
    std::vector<double> r, rho;
    for (const auto& a : g.samples) {
        Vec3 d = a.envelope - c;
        UnitTangent ray{c, d.normalized()};
        std::vector<CurveCrossing> hits = parent.crossings(ray);
        auto ahead = std::find_if(hits.begin(), hits.end(), [](const CurveCrossing& h) { return h.position > 0.0; });
        if (ahead == hits.end()) throw GeometryError("center lies outside the curve");
        r.push_back(d.norm());
        rho.push_back(ahead->position);
    }
    HomothetyFit fit;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        num += r[i] * rho[i];
        den += rho[i] * rho[i];
    }
    fit.lambda = num / den;
    for (std::size_t i = 0; i < r.size(); ++i)
        fit.max_residual = std::max(fit.max_residual, std::abs(r[i] - fit.lambda * rho[i]));
    return fit;
}

AreaPoritskyParameter::AreaPoritskyParameter(const ConvexCurve& curve, double p_ref, int anchors, int modes)
    : curve_(curve), p_ref_(p_ref) {
    if (!curve.closed()) throw DomainError("area Poritsky parameter needs a closed curve");
    if (modes < 0 || 2 * modes + 1 > anchors) throw DomainError("need at least 2 modes + 1 anchors");
    const double len = curve.length(), total = curve.affine_total();
    std::vector<std::pair<double, double>> ends = parallel_map<std::pair<double, double>>(anchors, [&](int i) {
        double s = len * i / anchors;
        return std::make_pair(curve.affine_length(s), curve.affine_length(area_map(curve, p_ref, s)));
    });
    Eigen::MatrixXd m(anchors, 2 * modes + 1);
    Eigen::VectorXd rhs(anchors);
    for (int i = 0; i < anchors; ++i) {
        double ta = 2.0 * M_PI * ends[i].first / total, tb = 2.0 * M_PI * ends[i].second / total;
        for (int k = 1; k <= modes; ++k) {
            m(i, k - 1) = std::cos(k * tb) - std::cos(k * ta);
            m(i, modes + k - 1) = std::sin(k * tb) - std::sin(k * ta);
        }
        m(i, 2 * modes) = -1.0;
        rhs(i) = -(ends[i].second - ends[i].first);
    }
    Eigen::VectorXd x = m.colPivHouseholderQr().solve(rhs);
    cos_.assign(x.data(), x.data() + modes);
    sin_.assign(x.data() + modes, x.data() + 2 * modes);
    fit_residual_ = (m * x - rhs).cwiseAbs().maxCoeff();
}

double AreaPoritskyParameter::t(double s) const {
    const double a = curve_.affine_length(s), th = 2.0 * M_PI * a / curve_.affine_total();
    double t = a;
    for (std::size_t k = 1; k <= cos_.size(); ++k) t += cos_[k - 1] * std::cos(k * th) + sin_[k - 1] * std::sin(k * th);
    return t;
}

double AreaPoritskyParameter::dt_ds(double s) const {
    const double w = 2.0 * M_PI / curve_.affine_total();
    const double th = w * curve_.affine_length(s);
    double g = 1.0;
    for (std::size_t k = 1; k <= cos_.size(); ++k)
        g += w * double(k) * (-cos_[k - 1] * std::sin(k * th) + sin_[k - 1] * std::cos(k * th));
    return std::cbrt(std::max(curve_.signed_curvature(s), 0.0)) * g;
}

PoritskyReport area_poritsky_check(const ConvexCurve& curve, const std::vector<double>& p_list, int n_samples,
                                   double p_ref, double tolerance) {
    if (n_samples < 2) throw DomainError("area Poritsky check needs at least two samples");
    AreaPoritskyParameter param(curve, p_ref);
    PoritskyReport rep;
    rep.tolerance = tolerance;
    rep.pass = true;
    const double len = curve.length();
    for (double p : p_list) {
        // anchors offset from the fitting anchors
        std::vector<double> inc = parallel_map<double>(n_samples, [&](int i) {
            double s = len * (i + 0.5) / n_samples;
            return param.t(area_map(curve, p, s)) - param.t(s);
        });
        double mean = 0.0;
        for (double v : inc) mean += v;
        mean /= double(inc.size());
        double dev = 0.0;
        for (double v : inc) dev = std::max(dev, std::abs(v - mean));
        rep.p.push_back(p);
        rep.c_p.push_back(mean);
        rep.max_deviation.push_back(dev);
        if (!(dev <= tolerance)) rep.pass = false;
    }
    return rep;
}

double chord_angle_ratio(const ConvexCurve& curve, double s_a, double s_b) {
    const Surface& surf = curve.surface();
    const Vec3 a = curve.point(s_a), b = curve.point(s_b);
    if (surf.distance(a, b) < 1e-12) throw DomainError("chord endpoints coincide");
    const double alpha = surf.angle(a, curve.tangent_geodesic(s_a).vector, surf.toward(a, b).vector);
    const double beta = surf.angle(b, curve.tangent_geodesic(s_b).vector, surf.toward(b, a).vector);
    return std::sin(alpha) / std::sin(beta);
}

}  // namespace caustica
