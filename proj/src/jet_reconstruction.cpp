#include "caustica/jet_reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "caustica/numerics.hpp"

namespace caustica {

namespace {

using Q = float128;
using QV = QVec3;
using Eval = std::function<std::array<QV, 3>(const Q&)>;

// Lifted kind of the model coordinates, or kPerturbedChart for the planar chart
// with metric (1 + eps r^6) I, whose geodesics are integrated numerically.
constexpr int kPerturbedChart = 2;

const Q kTwoThirds = Q(2) / Q(3);

Q cbrt_q(const Q& x) { return boost::multiprecision::cbrt(x); }

struct Conformal {
    Q ephi, gx, gy;  // e^phi and the gradient of phi
};

// Conformal factor of the model coordinates: Poincare disk or perturbed chart.
Conformal conformal_at(int k, const Q& eps, const Q& x, const Q& y) {
    const Q r2 = x * x + y * y;
    if (k < 0) {
        Q lam = Q(2) / (Q(1) - r2);
        return {lam, lam * x, lam * y};
    }
    const Q r4 = r2 * r2, den = Q(1) + eps * r4 * r2;
    Q f = Q(3) * eps * r4 / den;
    return {sqrt(den), f * x, f * y};
}

// Geodesic of the perturbed chart in Euclidean arclength sigma:
// (x, y, theta, metric length).
using GeoState = std::array<Q, 4>;

GeoState geodesic_rhs(const Q& eps, const GeoState& s) {
    Conformal c = conformal_at(kPerturbedChart, eps, s[0], s[1]);
    Q co = cos(s[2]), si = sin(s[2]);
    return {co, si, -c.gx * si + c.gy * co, c.ephi};
}

// Gragg-Bulirsch-Stoer over [0, sigma] with fixed substeps and extrapolation depth.
GeoState geodesic_shoot(const Q& eps, GeoState y, const Q& sigma) {
    constexpr int kDepth = 8;
    const int steps = std::max(1, int(ceil(abs(sigma) / Q(0.02))));
    const Q big_h = sigma / Q(steps);
    for (int i = 0; i < steps; ++i) {
        std::array<GeoState, kDepth> table;
        for (int j = 0; j < kDepth; ++j) {
            const int n = 2 * (j + 1);
            const Q h = big_h / Q(n);
            GeoState z0 = y, z1 = y, f = geodesic_rhs(eps, y);
            for (int c = 0; c < 4; ++c) z1[c] = y[c] + h * f[c];
            for (int m = 1; m < n; ++m) {
                f = geodesic_rhs(eps, z1);
                GeoState z2;
                for (int c = 0; c < 4; ++c) z2[c] = z0[c] + Q(2) * h * f[c];
                z0 = z1;
                z1 = z2;
            }
            f = geodesic_rhs(eps, z1);
            for (int c = 0; c < 4; ++c) table[j][c] = (z0[c] + z1[c] + h * f[c]) / Q(2);
            // Neville extrapolation in h^2 towards zero
            for (int l = j - 1; l >= 0; --l) {
                Q ratio = Q(j + 1) / Q(l + 1);
                Q den = ratio * ratio - Q(1);
                for (int c = 0; c < 4; ++c) table[l][c] = table[l + 1][c] + (table[l + 1][c] - table[l][c]) / den;
            }
        }
        y = table[0];
    }
    return y;
}

class Engine {
public:
    Engine(int k, Q eps, Eval eval, Q u0, Q u_lo, Q u_hi)
        : k_(k), eps_(eps), eval_(std::move(eval)), u0_(u0), u_lo_(u_lo), u_hi_(u_hi) {
        Local l = local(u0_);
        if (!(l.kappa > Q(0))) throw ConvexityError("curve is not strictly convex at the base point");
        kappa0_ = l.kappa;
        c_ = cbrt_q(kappa0_);
        speed0_ = l.speed;
    }

    Q kappa0() const { return kappa0_; }
    Q u0() const { return u0_; }

    Q t_of(const Q& u) const {
        auto f = [this](const Q& v) {
            Local l = local(v);
            return pow(l.kappa, kTwoThirds) * l.speed;
        };
        return c_ * integrate_gl<20>(f, u0_, u);
    }

    Q u_of(const Q& t) const {
        Q u = u0_ + t / (kappa0_ * speed0_);
        for (int it = 0; it < 40; ++it) {
            check_domain(u);
            Local l = local(u);
            Q du = (t_of(u) - t) / (c_ * pow(l.kappa, kTwoThirds) * l.speed);
            u -= du;
            if (!isfinite(u)) throw ConvergenceError("Lazutkin parameter inversion diverged");
            if (abs(du) <= Q(1e-31) * (Q(1) + abs(u))) return u;
        }
        throw ConvergenceError("Lazutkin parameter inversion did not converge");
    }

    Q arc(const Q& u1, const Q& u2) const {
        return integrate_gl<20>([this](const Q& v) { return local(v).speed; }, u1, u2, 2);
    }

    // |P1 C| + |C P2| for C the crossing of the tangent geodesics at u1 < u2.
    Q chord(const Q& u1, const Q& u2) const {
        auto d1 = eval_(u1), d2 = eval_(u2);
        if (k_ == kPerturbedChart) return chord_numeric(d1, d2);
        QV x1 = lifted::lift_point(k_, d1[0]), x2 = lifted::lift_point(k_, d2[0]);
        QV v1 = lifted::lift_tangent(k_, d1[0], d1[1]), v2 = lifted::lift_tangent(k_, d2[0], d2[1]);
        QV dir = lifted::cross(lifted::cross(x1, v1), lifted::cross(x2, v2)), c;
        if (!lifted::normalize_point(k_, dir, x1, c)) throw GeometryError("tangent geodesics do not cross");
        return lifted::distance(k_, x1, c) + lifted::distance(k_, c, x2);
    }

    Q string_length(const Q& u1, const Q& u2) const { return chord(u1, u2) - arc(u1, u2); }

    Q forward(const Q& t) const { return string_length(u0_, u_of(t)); }
    Q lambda(const Q& t) const { return forward(t) - string_length(u_of(-t), u0_); }

private:
    struct Local {
        Q speed, kappa;
    };

    Local local(const Q& u) const { return local(eval_(u)); }

    Local local(const std::array<QV, 3>& d) const {
        const QV &p = d[0], &v = d[1], &a = d[2];
        if (k_ > 0 && k_ != kPerturbedChart) {
            Q sp = sqrt(lifted::dot(v, v));
            return {sp, lifted::det(p, v, a) / (sp * sp * sp)};
        }
        Q se = sqrt(v[0] * v[0] + v[1] * v[1]);
        Q ke = (v[0] * a[1] - v[1] * a[0]) / (se * se * se);
        if (k_ == 0) return {se, ke};
        Conformal c = conformal_at(k_, eps_, p[0], p[1]);
        Q dphi_n = (-c.gx * v[1] + c.gy * v[0]) / se;
        return {c.ephi * se, (ke - dphi_n) / c.ephi};
    }

    void check_domain(const Q& u) const {
        if (u < u_lo_ || u > u_hi_)
            throw IllConditionedError("ladder leaves the curve's domain; reduce t0 below " +
                                      std::to_string(double(abs(t_of(u < u_lo_ ? u_lo_ : u_hi_)))));
    }

    Q chord_numeric(const std::array<QV, 3>& d1, const std::array<QV, 3>& d2) const {
        const Q th1 = atan2(d1[1][1], d1[1][0]), th2 = atan2(d2[1][1], d2[1][0]);
        // Euclidean tangent-line crossing as the starting guess
        const Q c1 = cos(th1), s1 = sin(th1), c2 = cos(th2), s2 = sin(th2);
        const Q dx = d2[0][0] - d1[0][0], dy = d2[0][1] - d1[0][1];
        const Q den = c1 * s2 - s1 * c2;
        Q a = (dx * s2 - dy * c2) / den, b = (dx * s1 - dy * c1) / den;
        GeoState g1{d1[0][0], d1[0][1], th1, Q(0)}, g2{d2[0][0], d2[0][1], th2, Q(0)};
        const Q scale = abs(a) + abs(b);
        Q last = std::numeric_limits<Q>::infinity();
        for (int it = 0; it < 40; ++it) {
            GeoState e1 = geodesic_shoot(eps_, g1, a), e2 = geodesic_shoot(eps_, g2, b);
            const Q fx = e1[0] - e2[0], fy = e1[1] - e2[1];
            // columns: d/da = (cos, sin)(e1), d/db = -(cos, sin)(e2)
            const Q j11 = cos(e1[2]), j21 = sin(e1[2]), j12 = -cos(e2[2]), j22 = -sin(e2[2]);
            const Q det = j11 * j22 - j12 * j21;
            const Q da = (fx * j22 - fy * j12) / det, db = (j11 * fy - j21 * fx) / det;
            a -= da;
            b -= db;
            // stop at quad rounding, or once Newton stalls on the noise floor; the
            // floor is position rounding over the tangent angle, so it grows
            // away from the origin and at short chords
            const Q move = abs(da) + abs(db);
            if (move <= Q(1e-32) * scale || (move <= Q(1e-24) * scale && move > last / Q(4))) {
                e1 = geodesic_shoot(eps_, g1, a);
                e2 = geodesic_shoot(eps_, g2, b);
                return abs(e1[3]) + abs(e2[3]);
            }
            last = move;
        }
        throw ConvergenceError("tangent geodesic crossing did not converge");
    }

    int k_;
    Q eps_;
    Eval eval_;
    Q u0_, u_lo_, u_hi_;
    Q kappa0_, c_, speed0_;
};

// Model-coordinate evaluator of the graph of a jet in its chart.
Engine make_engine(const GraphJet& jet, const ChartMetric& metric) {
    if (jet.b.size() < 3) throw InputError("graph jet needs at least b0, b1, b2");
    std::vector<Q> coef(jet.b.size());
    Q fact(1);
    for (std::size_t i = 0; i < jet.b.size(); ++i) {
        if (i > 0) fact *= Q(int(i));
        coef[i] = Q(jet.b[i]) / fact;
    }
    using J = Taylor<Q, 2>;
    const Q x0 = jet.x;
    const ChartMetric::Kind kind = metric.kind;
    Eval eval = [coef, x0, kind](const Q& u) {
        J x = J::variable(u), dx = x - J(x0);
        J h(coef.back());
        for (std::size_t i = coef.size() - 1; i-- > 0;) h = h * dx + J(coef[i]);
        std::array<J, 3> p;
        switch (kind) {
            case ChartMetric::Kind::sphere: {
                J zx = x / J(Q(2)), zy = h / J(Q(2));
                J r2 = zx * zx + zy * zy, den = J(Q(1)) + r2;
                p = {J(Q(2)) * zx / den, J(Q(2)) * zy / den, (J(Q(1)) - r2) / den};
                break;
            }
            case ChartMetric::Kind::hyperbolic:
                p = {x / J(Q(2)), h / J(Q(2)), J(Q(0))};
                break;
            default:
                p = {x, h, J(Q(0))};
        }
        std::array<QV, 3> out;
        for (int d = 0; d <= 2; ++d)
            for (int c = 0; c < 3; ++c) out[d][c] = p[c].derivative(d);
        return out;
    };
    int k = 0;
    if (kind == ChartMetric::Kind::sphere) k = 1;
    if (kind == ChartMetric::Kind::hyperbolic) k = -1;
    if (kind == ChartMetric::Kind::perturbed) k = kPerturbedChart;
    const Q inf = std::numeric_limits<Q>::infinity();
    return Engine(k, Q(metric.epsilon), eval, x0, -inf, inf);
}

Engine make_engine(const ConvexCurve& curve) {
    int k = 0;
    switch (curve.surface().kind()) {
        case SurfaceKind::euclidean: k = 0; break;
        case SurfaceKind::sphere: k = 1; break;
        case SurfaceKind::hyperbolic: k = -1; break;
        default: throw UnsupportedKindError("Lambda Taylor coefficients need a constant-curvature surface");
    }
    auto model = curve.model_ptr();
    Eval eval = [model](const Q& u) { return model->eval2q(u); };
    const Q inf = std::numeric_limits<Q>::infinity();
    const CurveModel& m = curve.model();
    const Q lo = m.periodic ? -inf : Q(m.u_min), hi = m.periodic ? inf : Q(m.u_max);
    return Engine(k, Q(0), eval, Q(curve.parameter(curve.s0())), lo, hi);
}

// Solves the square system a x = y by Gaussian elimination with partial pivoting.
std::vector<Q> solve_dense(std::vector<std::vector<Q>> a, std::vector<Q> y) {
    const std::size_t n = y.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(y[c], y[piv]);
        if (a[c][c] == Q(0)) throw IllConditionedError("singular ladder system");
        for (std::size_t r = c + 1; r < n; ++r) {
            Q f = a[r][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
            y[r] -= f * y[c];
        }
    }
    std::vector<Q> x(n);
    for (std::size_t c = n; c-- > 0;) {
        Q s = y[c];
        for (std::size_t j = c + 1; j < n; ++j) s -= a[c][j] * x[j];
        x[c] = s / a[c][c];
    }
    return x;
}

struct LadderFit {
    std::vector<Q> coefficients;  // Lambda_hat_3 ..
    Q residual;
};

// Fits values = sum_{k=3}^{K} c_k t^k on a geometric ladder t0 2^-j, j < levels,
// with K = levels + 1 (least squares with one redundant level). Nodes are scaled
// by t0 so the system stays well conditioned.
LadderFit fit_ladder(const Engine& e, const Q& t0, int levels) {
    const int terms = levels - 1;
    std::vector<Q> ts(levels);
    for (int j = 0; j < levels; ++j) ts[j] = t0 / pow(Q(2), j);
    std::vector<Q> vals = parallel_map<Q>(std::size_t(levels), [&](std::size_t j) { return e.lambda(ts[j]); });
    std::vector<std::vector<Q>> ata(terms, std::vector<Q>(terms, Q(0)));
    std::vector<Q> aty(terms, Q(0));
    std::vector<std::vector<Q>> rows(levels, std::vector<Q>(terms));
    for (int j = 0; j < levels; ++j) {
        Q tau = ts[j] / t0, p = tau * tau * tau;
        for (int m = 0; m < terms; ++m, p *= tau) rows[j][m] = p;
    }
    for (int j = 0; j < levels; ++j)
        for (int a = 0; a < terms; ++a) {
            aty[a] += rows[j][a] * vals[j];
            for (int b = 0; b < terms; ++b) ata[a][b] += rows[j][a] * rows[j][b];
        }
    std::vector<Q> c = solve_dense(ata, aty);
    Q worst(0), scale(0);
    for (int j = 0; j < levels; ++j) {
        Q f(0);
        for (int m = 0; m < terms; ++m) f += rows[j][m] * c[m];
        worst = std::max(worst, abs(f - vals[j]));
        scale = std::max(scale, abs(vals[j]));
    }
    LadderFit out;
    out.residual = scale > Q(0) ? worst / scale : Q(0);
    Q tk = t0 * t0 * t0;
    for (int m = 0; m < terms; ++m, tk *= t0) out.coefficients.push_back(c[m] / tk);
    return out;
}

LambdaTaylor run_ladder(const Engine& e, int order, const LadderOptions& opts) {
    if (opts.levels < 4) throw InputError("the ladder needs at least 4 levels");
    if (order < 3 || order > opts.levels + 1)
        throw InputError("order must lie in [3, levels + 1] for a ladder of " + std::to_string(opts.levels) +
                         " levels");
    // The normalized parameter already carries the curvature scale: t is about
    // kappa(0) s, the tangent turning, so t0 = 0.05 spans an arc of 0.05 / kappa(0).
    if (!(opts.t0 > 0.0)) throw InputError("t0 must be positive");
    const double t0 = opts.t0;
    const std::string range = "use t0 in [0.01, 0.2] with at most 12 levels";
    if (t0 > 0.5) throw IllConditionedError("ladder too coarse for the curvature; " + range);
    const double t_min = std::ldexp(t0, -(opts.levels - 1));
    // Lambda ~ t^6 at the finest step must stay above quad rounding of L ~ t^3
    if (t_min < 1e-5) throw IllConditionedError("finest ladder step loses Lambda to rounding; " + range);

    LadderFit main = fit_ladder(e, Q(t0), opts.levels);
    LambdaTaylor out;
    out.residual = double(main.residual);
    for (int j = 0; j < opts.levels; ++j) out.steps.push_back(std::ldexp(t0, -j));
    for (int k = 3; k <= order; ++k) out.coefficients.push_back(double(main.coefficients[k - 3]));
    out.error.assign(out.coefficients.size(), 0.0);
    if (opts.error_estimate) {
        LadderFit alt = fit_ladder(e, Q(t0) / sqrt(Q(2)), opts.levels);
        for (int k = 3; k <= order; ++k)
            out.error[k - 3] = double(abs(main.coefficients[k - 3] - alt.coefficients[k - 3]));
    }
    return out;
}

struct ChartPoint {
    double ephi, gx, gy;
};

ChartPoint chart_conformal(const ChartMetric& m, double x, double y) {
    const double r2 = x * x + y * y;
    switch (m.kind) {
        case ChartMetric::Kind::sphere: {
            double d = 1.0 + 0.25 * r2;
            return {1.0 / d, -0.5 * x / d, -0.5 * y / d};
        }
        case ChartMetric::Kind::hyperbolic: {
            double d = 1.0 - 0.25 * r2;
            if (d <= 0.0) throw DomainError("point outside the hyperbolic chart");
            return {1.0 / d, 0.5 * x / d, 0.5 * y / d};
        }
        case ChartMetric::Kind::perturbed: {
            double den = 1.0 + m.epsilon * r2 * r2 * r2, f = 3.0 * m.epsilon * r2 * r2 / den;
            return {std::sqrt(den), f * x, f * y};
        }
        default:
            return {1.0, 0.0, 0.0};
    }
}

// Chart in which the conics of the metric are plane conics.
template <class S>
std::array<S, 2> projective_chart(ChartMetric::Kind kind, const S& x, const S& y) {
    if (kind == ChartMetric::Kind::euclidean) return {x, y};
    const S q = (x * x + y * y) / S(4.0);
    const S d = kind == ChartMetric::Kind::sphere ? S(1.0) - q : S(1.0) + q;
    return {x / d, y / d};
}

}  // namespace

ChartMetric ChartMetric::parse(const std::string& spec) {
    ChartMetric m;
    if (spec == "euclidean") return m;
    if (spec == "sphere") {
        m.kind = Kind::sphere;
        return m;
    }
    if (spec == "hyperbolic") {
        m.kind = Kind::hyperbolic;
        return m;
    }
    const std::string prefix = "perturbed:eps=";
    if (spec.rfind(prefix, 0) == 0) {
        m.kind = Kind::perturbed;
        try {
            std::size_t used = 0;
            m.epsilon = std::stod(spec.substr(prefix.size()), &used);
            if (used != spec.size() - prefix.size()) throw InputError("");
        } catch (const std::exception&) {
            throw InputError("bad perturbation size in metric spec '" + spec + "'");
        }
        return m;
    }
    throw InputError("unknown metric '" + spec + "' (euclidean | sphere | hyperbolic | perturbed:eps=<value>)");
}

std::string ChartMetric::name() const {
    switch (kind) {
        case Kind::sphere: return "sphere";
        case Kind::hyperbolic: return "hyperbolic";
        case Kind::perturbed: {
            std::ostringstream s;
            s << "perturbed:eps=" << epsilon;
            return s.str();
        }
        default: return "euclidean";
    }
}

GraphJet Jet4::with_b5(double b5) const {
    GraphJet g{x, std::vector<double>(b.begin(), b.end())};
    g.b.push_back(b5);
    return g;
}

double jet_curvature(const GraphJet& jet, const ChartMetric& metric) {
    if (jet.b.size() < 3) throw InputError("graph jet needs at least b0, b1, b2");
    const double b1 = jet.b[1], b2 = jet.b[2], q = std::sqrt(1.0 + b1 * b1);
    ChartPoint c = chart_conformal(metric, jet.x, jet.b[0]);
    const double ke = b2 / (q * q * q), dphi_n = (-c.gx * b1 + c.gy) / q;
    return (ke - dphi_n) / c.ephi;
}

LambdaTaylor lambda_taylor(const ConvexCurve& curve, int order, const LadderOptions& opts) {
    return run_ladder(make_engine(curve), order, opts);
}

LambdaTaylor lambda_taylor(const GraphJet& jet, const ChartMetric& metric, int order, const LadderOptions& opts) {
    return run_ladder(make_engine(jet, metric), order, opts);
}

struct JetStrings::Impl {
    Engine engine;
};

JetStrings::JetStrings(const GraphJet& jet, const ChartMetric& metric)
    : impl_(std::make_unique<Impl>(Impl{make_engine(jet, metric)})) {}
JetStrings::~JetStrings() = default;
JetStrings::JetStrings(JetStrings&&) noexcept = default;

double JetStrings::kappa0() const { return double(impl_->engine.kappa0()); }
double JetStrings::x_at(double t) const { return double(impl_->engine.u_of(Q(t))); }
double JetStrings::forward_length(double t) const { return double(impl_->engine.forward(Q(t))); }
double JetStrings::forward_difference(const JetStrings& other, double t) const {
    return double(impl_->engine.forward(Q(t)) - other.impl_->engine.forward(Q(t)));
}
double JetStrings::lambda(double t) const { return double(impl_->engine.lambda(Q(t))); }

double sigma_n(double kappa, double norm_w, double norm_u, int n) {
    if (n < 3) throw InputError("sigma_n needs n >= 3");
    if (n == 3 || n % 2 == 0) return 0.0;
    double fact = 1.0;
    for (int i = 2; i <= n + 1; ++i) fact *= i;
    return (n - 2) * (n - 3) / (6.0 * fact) * norm_w * std::pow(norm_u * kappa, -n);
}

double sigma_n(const GraphJet& j2, const ChartMetric& metric, int n) {
    const double kappa = jet_curvature(j2, metric);
    if (!(kappa > 0.0)) throw ConvexityError("jet is not convex");
    const double q = std::sqrt(1.0 + j2.b[1] * j2.b[1]);
    const double ephi = chart_conformal(metric, j2.x, j2.b[0]).ephi;
    return sigma_n(kappa, ephi / q, ephi * q, n);
}

B5Solution solve_b5(const Jet4& jet, const ChartMetric& metric, const LadderOptions& opts) {
    B5Solution r;
    r.expected_slope = sigma_n(jet.with_b5(0.0), metric, 5);
    LadderOptions o = opts;
    o.error_estimate = false;
    // Jets with large b3, b4 relative to the curvature need a finer ladder; the
    // ladder is halved twice before the self-check is declared failed.
    for (int attempt = 0; attempt < 3; ++attempt, o.t0 *= 0.5) {
        const double l0 = lambda_taylor(jet.with_b5(0.0), metric, 6, o).coefficient(6);
        const double l1 = lambda_taylor(jet.with_b5(1.0), metric, 6, o).coefficient(6);
        r.lambda6_at_zero = l0;
        r.slope = l1 - l0;
        if (std::abs(r.slope / r.expected_slope - 1.0) <= 0.05) {
            r.b5 = -l0 / r.slope;
            return r;
        }
    }
    std::ostringstream s;
    s << "measured Lambda_6 slope " << r.slope << " disagrees with sigma_5 = " << r.expected_slope;
    throw ConvergenceError(s.str());
}

double JetCurve::y(double x) const {
    const double slack = 1e-12 * (1.0 + std::abs(x));
    if (samples.size() < 2 || x < samples.front().x - slack || x > samples.back().x + slack)
        throw RangeError("abscissa outside the reconstructed range");
    x = std::clamp(x, samples.front().x, samples.back().x);
    auto hi = std::upper_bound(samples.begin(), samples.end(), x,
                               [](double v, const JetSample& s) { return v < s.x; });
    if (hi == samples.end()) --hi;
    auto lo = hi - 1;
    const double h = hi->x - lo->x, s = (x - lo->x) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * lo->b[0] + h10 * h * lo->b[1] + h01 * hi->b[0] + h11 * h * hi->b[1];
}

JetCurve integrate_jet_ode(const Jet4& start, const ChartMetric& metric, double range, double step,
                           const LadderOptions& opts) {
    if (!(range > 0.0) || !(step > 0.0)) throw InputError("range and step must be positive");
    if (!(jet_curvature(start.with_b5(0.0), metric) > 0.0)) throw ConvexityError("starting jet is not convex");
    using State = std::array<double, 5>;
    auto rhs = [&](double x, const State& b, double* b5_out) {
        Jet4 j{x, b};
        if (!(jet_curvature(j.with_b5(0.0), metric) > 0.0)) throw ConvexityError("convexity lost");
        double b5 = solve_b5(j, metric, opts).b5;
        if (b5_out) *b5_out = b5;
        return State{b[1], b[2], b[3], b[4], b5};
    };

    JetCurve out;
    std::vector<JetSample> forward, backward;
    for (int dir : {1, -1}) {
        std::vector<JetSample>& seq = dir > 0 ? forward : backward;
        double x = start.x;
        State b = start.b;
        const double end = start.x + dir * range;
        try {
            while (true) {
                JetSample smp{x, b, 0.0};
                State k1 = rhs(x, b, &smp.b5);
                seq.push_back(smp);
                if (std::abs(end - x) <= 1e-12 * std::max(1.0, std::abs(end))) break;
                const double h = dir * std::min(step, std::abs(end - x));
                State y2, y3, y4;
                for (int i = 0; i < 5; ++i) y2[i] = b[i] + 0.5 * h * k1[i];
                State k2 = rhs(x + 0.5 * h, y2, nullptr);
                for (int i = 0; i < 5; ++i) y3[i] = b[i] + 0.5 * h * k2[i];
                State k3 = rhs(x + 0.5 * h, y3, nullptr);
                for (int i = 0; i < 5; ++i) y4[i] = b[i] + h * k3[i];
                State k4 = rhs(x + h, y4, nullptr);
                for (int i = 0; i < 5; ++i) b[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
                x = (std::abs(end - x - h) <= 1e-12 * std::max(1.0, std::abs(end))) ? end : x + h;
            }
        } catch (const Error& e) {
            out.complete = false;
            if (!out.stop_reason.empty()) out.stop_reason += "; ";
            out.stop_reason += std::string(dir > 0 ? "forward: " : "backward: ") + e.what();
        }
    }
    for (auto it = backward.rbegin(); it != backward.rend(); ++it)
        if (it->x != start.x) out.samples.push_back(*it);
    out.samples.insert(out.samples.end(), forward.begin(), forward.end());
    return out;
}

double conic_deviation(const Jet4& start, const ChartMetric& metric, const JetCurve& curve) {
    if (metric.kind == ChartMetric::Kind::perturbed)
        throw UnsupportedKindError("the perturbed metric has no conic oracle");
    using J = Taylor<double, 4>;
    J dx = J::variable(0.0), h(start.b[4] / 24.0);
    for (int k = 3; k >= 0; --k) {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        h = h * dx + J(start.b[k] / f);
    }
    auto p = projective_chart(metric.kind, J(start.x) + dx, h);
    const std::array<J, 6> mono{p[0] * p[0], p[0] * p[1], p[1] * p[1], p[0], p[1], J(1.0)};
    // F(P(x)) = O(dx^5): five linear conditions on six conic coefficients
    Eigen::Matrix<double, 5, 6> m;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 6; ++c) m(r, c) = mono[c].c[r];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const Eigen::VectorXd f = svd.matrixV().col(5);
    double worst = 0.0;
    for (const JetSample& smp : curve.samples) {
        auto [u, v] = projective_chart(metric.kind, smp.x, smp.b[0]);
        const double val = f[0] * u * u + f[1] * u * v + f[2] * v * v + f[3] * u + f[4] * v + f[5];
        const double gu = 2 * f[0] * u + f[1] * v + f[3], gv = f[1] * u + 2 * f[2] * v + f[4];
        worst = std::max(worst, std::abs(val) / std::hypot(gu, gv));
    }
    return worst;
}

}  // namespace caustica
