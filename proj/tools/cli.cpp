#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "caustica/acceptance.hpp"
#include "caustica/billiard_maps.hpp"
#include "caustica/errors.hpp"
#include "caustica/incidence.hpp"
#include "caustica/jet_reconstruction.hpp"
#include "caustica/outer_billiards.hpp"
#include "caustica/string_construction.hpp"

namespace caustica::cli {

namespace {

// Raised for bad flags, config files or parameter values; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sci(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*e", digits, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<double> number_list(const std::string& flag, const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (item.empty() || used != item.size() || !std::isfinite(x))
            throw UsageError("--" + flag + ": '" + item + "' is not a number");
        v.push_back(x);
    }
    if (v.empty()) throw UsageError("--" + flag + " needs at least one number");
    return v;
}

std::vector<double> positive_list(const std::string& flag, const std::string& text) {
    std::vector<double> v = number_list(flag, text);
    for (double x : v)
        if (!(x > 0.0)) throw UsageError("--" + flag + ": values must be positive");
    return v;
}

Vec3 point_arg(const std::string& flag, const std::string& text) {
    std::vector<double> v = number_list(flag, text);
    if (v.size() != 2 && v.size() != 3) throw UsageError("--" + flag + " takes x,y or x,y,z");
    return Vec3(v[0], v[1], v.size() == 3 ? v[2] : 0.0);
}

struct Table {
    std::vector<std::string> schema;  // "name [unit]"
    std::vector<std::vector<std::string>> rows;
};

struct Outcome {
    std::string quantity;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    Table table;
    nlohmann::ordered_json extra;  // command-specific JSON fields
};

Outcome bounded(std::string quantity, double value, double tol) {
    Outcome o;
    o.quantity = std::move(quantity);
    o.value = value;
    o.tolerance = tol;
    o.pass = std::isfinite(value) && value <= tol;
    return o;
}

// A subcommand registers its options on `app` and returns the action to run
// after parsing, so option storage lives in the closure.
struct Command {
    std::string name;
    std::string help;
    std::function<std::function<Outcome()>(CLI::App&)> setup;
};

Outcome surface_cmd(const std::string& spec, const std::string& radii, const std::string& center_text, double tol) {
    Surface s = make_surface(spec);
    Vec3 center = s.kind() == SurfaceKind::sphere ? Vec3(0.0, 0.6, 0.8) : Vec3(0.1, 0.3, 0.0);
    if (!center_text.empty()) center = point_arg("center", center_text);
    if (!s.contains(center)) throw UsageError("--center is not a point of the " + s.name() + " model");
    Table t{{"r [length]", "psi [length]", "circumference_over_2pi [length]", "relative_error [1]"}, {}};
    double worst = 0.0;
    for (double r : positive_list("radius", radii)) {
        const double c = circle_circumference(s, center, r) / (2.0 * M_PI), p = psi(s, r);
        worst = std::max(worst, std::abs(c / p - 1.0));
        t.rows.push_back({num(r), num(p), num(c), num(std::abs(c / p - 1.0))});
    }
    Outcome o = bounded("max relative difference of circumference / 2 pi and psi", worst, tol);
    o.table = std::move(t);
    return o;
}

Outcome string_cmd(const std::string& curve_spec, double p, int samples, const std::string& method, double tol) {
    ConvexCurve c = parse_curve(curve_spec);
    StringOptions opts;
    opts.samples = samples;
    StringCurve g = string_curve(c, p, parse_string_method(method), opts);
    Table t{{"s_a [arclength]", "s_b [arclength]", "x [chart]", "y [chart]", "z [chart]", "residual [length]"}, {}};
    double worst = 0.0;
    for (const StringSample& q : g.samples) {
        worst = std::max(worst, std::abs(q.residual));
        t.rows.push_back({num(q.s_a), num(q.s_b), num(q.c.x()), num(q.c.y()), num(q.c.z()), num(q.residual)});
    }
    Outcome o = bounded("max |L(s_a, s_b) - p|", worst, tol);
    o.table = std::move(t);
    return o;
}

Outcome poritsky_cmd(const std::string& curve_spec, const std::string& ps, int samples, double tol) {
    PoritskyReport r = poritsky_check(parse_curve(curve_spec), positive_list("p", ps), samples, tol);
    Table t{{"p [length]", "mean_increment [lazutkin]", "max_deviation [lazutkin]"}, {}};
    for (std::size_t i = 0; i < r.p.size(); ++i) t.rows.push_back({num(r.p[i]), num(r.c_p[i]), num(r.max_deviation[i])});
    Outcome o = bounded("max deviation of t-increments",
                        *std::max_element(r.max_deviation.begin(), r.max_deviation.end()), tol);
    o.table = std::move(t);
    return o;
}

Outcome lazutkin_cmd(const std::string& curve_spec, const std::string& xs, double y_lo, double y_hi, int n, double tol,
                     double coef_tol) {
    if (!(y_lo < y_hi)) throw UsageError("--y-lo must be below --y-hi");
    ConvexCurve c = parse_curve(curve_spec);
    WeaklyBilliardMap f = billiard_map_sy(c);
    LazutkinChart ch = LazutkinChart::for_billiard(c);
    Table t{{"x [arclength]", "Y [lazutkin]", "dX [lazutkin]", "dY [lazutkin]"}, {}};
    double slope_err = 0.0, coef_err = 0.0;
    for (double x : number_list("x", xs)) {
        NormalFormReport r = normal_form_check(f, ch, x, y_lo, y_hi, n);
        slope_err = std::max(slope_err, std::abs(r.slope - 0.5));
        coef_err = std::max(coef_err, std::abs(r.coefficient - 1.0));
        for (std::size_t i = 0; i < r.Y.size(); ++i) t.rows.push_back({num(x), num(r.Y[i]), num(r.dX[i]), num(r.dY[i])});
    }
    Outcome o = bounded("max |X-step exponent - 0.5|", slope_err, tol);
    o.pass = o.pass && coef_err <= coef_tol;
    o.extra["max_coefficient_error"] = coef_err;
    o.extra["coefficient_tolerance"] = coef_tol;
    o.table = std::move(t);
    return o;
}

Outcome plog_cmd(const std::string& curve_spec, const std::string& y0s, double x0, double delta, long budget,
                 double tol) {
    ConvexCurve c = parse_curve(curve_spec);
    WeaklyBilliardMap f = billiard_map_sy(c);
    LazutkinChart ch = LazutkinChart::for_billiard(c);
    std::vector<double> y0 = positive_list("y0", y0s);
    std::sort(y0.begin(), y0.end(), std::greater<>());
    Table t{{"Y0 [lazutkin]", "j [step]", "X [lazutkin]", "Y [lazutkin]"}, {}};
    double last_alpha = HUGE_VAL, beta = 0.0;
    bool decreasing = true, bands = true, capped = false;
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (double y : y0) {
        OrbitRecord r = orbit(f, ch, x0, y, delta, budget);
        PlogStats st = plog_bounds_check(r);
        decreasing = decreasing && st.alpha < last_alpha;
        last_alpha = st.alpha;
        bands = bands && plog_bands_hold(r, st.beta + 1e-15);
        capped = capped || r.capped;
        beta = st.beta;  // ends at the smallest Y0
        runs.push_back({{"Y0", y}, {"alpha", st.alpha}, {"beta", st.beta}, {"m", st.m}});
        for (std::size_t j = 0; j < r.X.size(); ++j) t.rows.push_back({num(y), std::to_string(j), num(r.X[j]), num(r.Y[j])});
    }
    Outcome o = bounded("beta at the smallest Y0", beta, tol);
    o.pass = o.pass && decreasing && bands && !capped;
    o.extra["alpha_strictly_decreasing"] = decreasing;
    o.extra["bands_hold"] = bands;
    o.extra["runs"] = runs;
    o.table = std::move(t);
    return o;
}

Outcome outer_cmd(const std::string& curve_spec, const std::string& start, int steps, const std::string& ps,
                  int samples, double tol) {
    ConvexCurve c = parse_curve(curve_spec);
    Vec3 a = point_arg("point", start);
    if (c.surface().kind() == SurfaceKind::sphere) a.normalize();
    Table t{{"j [step]", "x [chart]", "y [chart]", "z [chart]", "s_tangency [arclength]", "distance [length]"}, {}};
    t.rows.push_back({"0", num(a.x()), num(a.y()), num(a.z()), "", ""});
    for (int j = 1; j <= steps; ++j) {
        OuterStep st = outer_step(c, a);
        a = st.image;
        t.rows.push_back({std::to_string(j), num(a.x()), num(a.y()), num(a.z()), num(st.s_tangency), num(st.distance)});
    }
    PoritskyReport r = area_poritsky_check(c, positive_list("p", ps), samples, 5e-4, tol);
    Outcome o = bounded("max area Poritsky deviation",
                        *std::max_element(r.max_deviation.begin(), r.max_deviation.end()), tol);
    o.table = std::move(t);
    return o;
}

Outcome ceva_cmd(const std::string& spec, double size, const std::string& weights, double tol) {
    Surface s = make_surface(spec);
    if (!s.constant_curvature()) throw UsageError("ceva needs a constant-curvature surface");
    const Vec3 origin = s.kind() == SurfaceKind::sphere ? Vec3(0, 0, 1) : Vec3::Zero();
    auto vertex = [&](double th) { return s.flow(s.unit(origin, Vec3(std::cos(th), std::sin(th), 0)), size).point; };
    GeodesicTriangle tri{vertex(0.1), vertex(2.3), vertex(4.0)};
    validate_triangle(s, tri);
    auto along = [&](const Vec3& p, const Vec3& q, double f) { return s.flow(s.toward(p, q), f * s.distance(p, q)).point; };
    auto foot = [&](const Vec3& from, const Vec3& through, const Vec3& p, const Vec3& q) {
        auto x = s.intersect(s.toward(from, through), s.toward(p, q));
        if (!x) throw GeometryError("cevian misses its side");
        return x->point;
    };
    Table t{{"weight [1]", "ceva_product [1]", "concurrency_distance [length]"}, {}};
    double worst = 0.0;
    for (double w : number_list("weights", weights)) {
        if (!(w > 0.0 && w < 1.0)) throw UsageError("--weights must lie in (0, 1)");
        // interior point on the segment from A towards a point of BC
        const Vec3 p = along(tri.a, along(tri.b, tri.c, w), 0.3 + 0.4 * w);
        const Vec3 a1 = foot(tri.a, p, tri.b, tri.c), b1 = foot(tri.b, p, tri.c, tri.a), c1 = foot(tri.c, p, tri.a, tri.b);
        const double prod = ceva_product(s, tri, a1, b1, c1);
        Concurrency cc = cevian_concurrency(s, tri, a1, b1, c1);
        worst = std::max(worst, std::abs(prod - 1.0));
        t.rows.push_back({num(w), num(prod), num(cc.distance.value_or(HUGE_VAL))});
    }
    Outcome o = bounded("max |Ceva product - 1| for concurrent cevians", worst, tol);
    o.table = std::move(t);
    return o;
}

Outcome incidence_cmd(const std::string& curve_spec, const std::string& offsets, const std::string& spacing,
                      double tol) {
    ConvexCurve c = parse_curve(curve_spec);
    std::vector<double> gap = positive_list("spacing", spacing);
    if (gap.size() != 2) throw UsageError("--spacing takes two fractions of the length");
    const double len = c.length();
    Table t{{"s_a [arclength]", "s_b [arclength]", "s_c [arclength]", "projective_residual [1]",
             "concurrency_distance [length]"},
            {}};
    double worst = 0.0;
    for (double off : number_list("offsets", offsets)) {
        const double sa = off * len, sb = (off + gap[0]) * len, sc = (off + gap[1]) * len;
        TangentIncidence r = tangent_incidence_check(c, sa, sb, sc);
        const double d = r.residual.distance.value_or(HUGE_VAL);
        worst = std::max(worst, d);
        t.rows.push_back({num(sa), num(sb), num(sc), num(r.residual.projective), num(d)});
    }
    Outcome o = bounded("max concurrency residual of tangent triples", worst, tol);
    o.table = std::move(t);
    return o;
}

Outcome jet_ode_cmd(const std::string& jet_text, const std::string& metric_spec, double range, double step, double t0,
                    double tol) {
    std::vector<double> v = number_list("jet", jet_text);
    if (v.size() != 6) throw UsageError("--jet takes x,b0,b1,b2,b3,b4");
    Jet4 jet{v[0], {v[1], v[2], v[3], v[4], v[5]}};
    ChartMetric metric = ChartMetric::parse(metric_spec);
    LadderOptions opts;
    opts.t0 = t0;
    JetCurve curve = integrate_jet_ode(jet, metric, range, step, opts);
    Table t{{"x [chart]", "b0 [chart]", "b1 [1]", "b2 [1/chart]", "b3 [1/chart^2]", "b4 [1/chart^3]", "b5 [1/chart^4]"},
            {}};
    for (const JetSample& q : curve.samples)
        t.rows.push_back({num(q.x), num(q.b[0]), num(q.b[1]), num(q.b[2]), num(q.b[3]), num(q.b[4]), num(q.b5)});
    Outcome o;
    if (metric.kind == ChartMetric::Kind::perturbed) {
        // no conic oracle on a perturbed metric; the check is that the run completes
        o = bounded("incomplete reconstruction", curve.complete ? 0.0 : 1.0, 0.0);
    } else {
        o = bounded("max deviation from the conic with the starting 4-jet", conic_deviation(jet, metric, curve), tol);
        o.pass = o.pass && curve.complete;
    }
    o.extra["complete"] = curve.complete;
    if (!curve.complete) o.extra["stop_reason"] = curve.stop_reason;
    o.table = std::move(t);
    return o;
}

Outcome verify_all_cmd(const std::string& only, std::ostream& err) {
    std::vector<int> ids;
    if (!only.empty())
        for (double x : number_list("only", only)) ids.push_back(int(x));
    Table t{{"id [1]", "name [text]", "quantity [text]", "value [1]", "tolerance [1]", "lower_bound [bool]", "pass [bool]",
             "detail [text]"},
            {}};
    int passed = 0, total = 0;
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const Criterion& c : acceptance_criteria()) {
        if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
        CriterionResult r = run_criterion(c);
        err << format_result(r) << "\n";
        ++total;
        passed += r.pass;
        t.rows.push_back({std::to_string(r.id), csv_field(r.name), csv_field(r.quantity), num(r.value), num(r.tolerance),
                          r.lower_bound ? "true" : "false", r.pass ? "true" : "false", csv_field(r.detail)});
        results.push_back({{"id", r.id}, {"name", r.name}, {"quantity", r.quantity}, {"value", r.value},
                           {"tolerance", r.tolerance}, {"pass", r.pass}});
    }
    if (total == 0) throw UsageError("--only selects no criterion");
    Outcome o;
    o.quantity = "criteria failed";
    o.value = total - passed;
    o.tolerance = 0.0;
    o.pass = passed == total;
    o.extra["criteria"] = results;
    o.table = std::move(t);
    return o;
}

std::vector<Command> commands(std::ostream& err) {
    // defaults follow the acceptance settings on the ellipse a=2, b=1
    const std::string ellipse = "ellipse:a=2,b=1";
    std::vector<Command> cmds;
    cmds.push_back({"surface", "psi(r) against measured geodesic circle circumference", [](CLI::App& app) {
                        auto spec = std::make_shared<std::string>("sphere");
                        auto radii = std::make_shared<std::string>("0.1,0.5,1.0");
                        auto center = std::make_shared<std::string>();
                        auto tol = std::make_shared<double>(1e-6);
                        app.add_option("--surface", *spec, "euclidean | sphere | hyperbolic");
                        app.add_option("--radius", *radii, "comma-separated radii");
                        app.add_option("--center", *center, "circle center x,y[,z] in model coordinates");
                        app.add_option("--tolerance", *tol)->check(CLI::PositiveNumber);
                        return [=] { return surface_cmd(*spec, *radii, *center, *tol); };
                    }});
    cmds.push_back({"string", "string construction curve Gamma_p", [ellipse](CLI::App& app) {
                        auto curve = std::make_shared<std::string>(ellipse);
                        auto p = std::make_shared<double>(1e-3);
                        auto samples = std::make_shared<int>(64);
                        auto method = std::make_shared<std::string>("pair-rootfind");
                        auto tol = std::make_shared<double>(1e-9);
                        app.add_option("--curve", *curve);
                        app.add_option("--p", *p)->check(CLI::PositiveNumber);
                        app.add_option("--samples", *samples)->check(CLI::Range(2, 1000000));
                        app.add_option("--method", *method, "pair-rootfind | bisector-ode");
                        app.add_option("--tolerance", *tol)->check(CLI::PositiveNumber);
                        return [=] { return string_cmd(*curve, *p, *samples, *method, *tol); };
                    }});
    cmds.push_back({"poritsky-check", "string Poritsky property: t-increments of T_p", [ellipse](CLI::App& app) {
                        auto curve = std::make_shared<std::string>(ellipse);
                        auto ps = std::make_shared<std::string>("1e-4,1e-3");
                        auto samples = std::make_shared<int>(50);
                        auto tol = std::make_shared<double>(1e-6);
                        app.add_option("--curve", *curve);
                        app.add_option("--p", *ps, "comma-separated string parameters");
                        app.add_option("--samples", *samples)->check(CLI::Range(2, 1000000));
                        app.add_option("--tolerance", *tol)->check(CLI::PositiveNumber);
                        return [=] { return poritsky_cmd(*curve, *ps, *samples, *tol); };
                    }});
    cmds.push_back({"lazutkin-map", "billiard map in modified Lazutkin coordinates", [ellipse](CLI::App& app) {
                        auto curve = std::make_shared<std::string>(ellipse);
                        auto xs = std::make_shared<std::string>("0.3,1,2");
                        auto y_lo = std::make_shared<double>(1e-6);
                        auto y_hi = std::make_shared<double>(1e-3);
                        auto n = std::make_shared<int>(16);
                        auto tol = std::make_shared<double>(0.01);
                        auto coef_tol = std::make_shared<double>(0.02);
                        app.add_option("--curve", *curve);
                        app.add_option("--x", *xs, "comma-separated base points (arclength)");
                        app.add_option("--y-lo", *y_lo)->check(CLI::PositiveNumber);
                        app.add_option("--y-hi", *y_hi)->check(CLI::PositiveNumber);
                        app.add_option("--n", *n)->check(CLI::Range(3, 100000));
                        app.add_option("--tolerance", *tol)->check(CLI::PositiveNumber);
                        app.add_option("--coefficient-tolerance", *coef_tol)->check(CLI::PositiveNumber);
                        return [=] { return lazutkin_cmd(*curve, *xs, *y_lo, *y_hi, *n, *tol, *coef_tol); };
                    }});
    cmds.push_back({"plog", "orbit bounds near the boundary", [ellipse](CLI::App& app) {
                        auto curve = std::make_shared<std::string>(ellipse);
                        auto y0 = std::make_shared<std::string>("1e-4,1e-5,1e-6");
                        auto x0 = std::make_shared<double>(-0.5);
                        auto delta = std::make_shared<double>(0.5);
                        auto budget = std::make_shared<long>(1000000);
                        auto tol = std::make_shared<double>(0.1);
                        app.add_option("--curve", *curve);
                        app.add_option("--y0", *y0, "comma-separated starting Y");
                        app.add_option("--x0", *x0);
                        app.add_option("--delta", *delta)->check(CLI::PositiveNumber);
                        app.add_option("--budget", *budget)->check(CLI::PositiveNumber);
                        app.add_option("--tolerance", *tol)->check(CLI::PositiveNumber);
                        return [=] { return plog_cmd(*curve, *y0, *x0, *delta, *budget, *tol); };
                    }});
    cmds.push_back({"outer", "outer billiard orbit and the area Poritsky check", [ellipse](CLI::App& app) {
                        auto curve = std::make_shared<std::string>(ellipse);
                        auto point = std::make_shared<std::string>("3,0.5");
                        auto steps = std::make_shared<int>(20);
                        auto ps = std::make_shared<std::string>("1e-3,2e-3");
                        auto samples = std::make_shared<int>(64);
                        auto tol = std::make_shared<double>(1e-5);
                        app.add_option("--curve", *curve);
                        app.add_option("--point", *point, "starting point x,y[,z]");
                        app.add_option("--steps", *steps)->check(CLI::NonNegativeNumber);
                        app.add_option("--p", *ps, "comma-separated cut areas");
                        app.add_option("--samples", *samples)->check(CLI::Range(2, 1000000));
                        app.add_option("--tolerance", *tol)->check(CLI::PositiveNumber);
                        return [=] { return outer_cmd(*curve, *point, *steps, *ps, *samples, *tol); };
                    }});
    cmds.push_back({"ceva", "Ceva product of concurrent cevians", [](CLI::App& app) {
                        auto spec = std::make_shared<std::string>("sphere");
                        auto size = std::make_shared<double>(0.6);
                        auto weights = std::make_shared<std::string>("0.2,0.5,0.8");
                        auto tol = std::make_shared<double>(1e-9);
                        app.add_option("--surface", *spec);
                        app.add_option("--size", *size, "distance of the vertices from the center")
                            ->check(CLI::PositiveNumber);
                        app.add_option("--weights", *weights, "cevian point positions in (0, 1)");
                        app.add_option("--tolerance", *tol)->check(CLI::PositiveNumber);
                        return [=] { return ceva_cmd(*spec, *size, *weights, *tol); };
                    }});
    cmds.push_back({"incidence", "tangent incidence of three tangent geodesics", [ellipse](CLI::App& app) {
                        auto curve = std::make_shared<std::string>(ellipse);
                        auto offsets = std::make_shared<std::string>("0,0.17,0.4");
                        auto spacing = std::make_shared<std::string>("0.1,0.25");
                        auto tol = std::make_shared<double>(1e-8);
                        app.add_option("--curve", *curve);
                        app.add_option("--offsets", *offsets, "first tangency points, fractions of the length");
                        app.add_option("--spacing", *spacing, "offsets of the second and third points");
                        app.add_option("--tolerance", *tol)->check(CLI::PositiveNumber);
                        return [=] { return incidence_cmd(*curve, *offsets, *spacing, *tol); };
                    }});
    cmds.push_back({"jet-ode", "reconstruct a curve from a 4-jet", [](CLI::App& app) {
                        auto jet = std::make_shared<std::string>("0,0,0,1,0,3");
                        auto metric = std::make_shared<std::string>("euclidean");
                        auto range = std::make_shared<double>(0.1);
                        auto step = std::make_shared<double>(0.01);
                        auto t0 = std::make_shared<double>(0.05);
                        auto tol = std::make_shared<double>(1e-5);
                        app.add_option("--jet", *jet, "x,b0,b1,b2,b3,b4");
                        app.add_option("--metric", *metric, "euclidean | sphere | hyperbolic | perturbed:eps=v");
                        app.add_option("--range", *range)->check(CLI::PositiveNumber);
                        app.add_option("--step", *step)->check(CLI::PositiveNumber);
                        app.add_option("--t0", *t0, "largest ladder step")->check(CLI::PositiveNumber);
                        app.add_option("--tolerance", *tol)->check(CLI::PositiveNumber);
                        return [=] { return jet_ode_cmd(*jet, *metric, *range, *step, *t0, *tol); };
                    }});
    cmds.push_back({"verify-all", "run the acceptance criteria", [&err](CLI::App& app) {
                        auto only = std::make_shared<std::string>();
                        app.add_option("--only", *only, "comma-separated criterion ids");
                        return [=, &err] { return verify_all_cmd(*only, err); };
                    }});
    return cmds;
}

// key = value lines; '#' starts a comment. Keys mirror the long flags.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(n) + ": expected key = value");
        kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
}

std::string config_path(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file");
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
    }
    return path;
}

void write_output(const Outcome& o, const std::string& command, const std::string& format, std::ostream& out) {
    if (format == "json") {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["quantity"] = o.quantity;
        j["value"] = o.value;
        j["tolerance"] = o.tolerance;
        j["pass"] = o.pass;
        for (auto it = o.extra.begin(); it != o.extra.end(); ++it) j[it.key()] = it.value();
        out << j.dump(2) << "\n";
        return;
    }
    out << "# schema: ";
    for (std::size_t i = 0; i < o.table.schema.size(); ++i) out << (i ? ", " : "") << o.table.schema[i];
    out << "\n";
    for (std::size_t i = 0; i < o.table.schema.size(); ++i) {
        const std::string& col = o.table.schema[i];
        out << (i ? "," : "") << col.substr(0, col.find(" ["));
    }
    out << "\n";
    for (const auto& row : o.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"caustica: billiards, string constructions and Poritsky parameters on surfaces"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string output, format = "csv", config;
    std::function<Outcome()> action;
    std::string chosen;
    std::vector<Command> cmds = commands(err);
    std::map<std::string, CLI::App*> subs;
    for (Command& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        sub->add_option("--config", config, "key = value file; command-line flags take precedence");
        sub->add_option("--out", output, "output file (default: standard output)");
        sub->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
        auto act = c.setup(*sub);
        sub->callback([&action, &chosen, act, name = c.name] {
            action = act;
            chosen = name;
        });
        subs[c.name] = sub;
    }

    try {
        // config values go right after the subcommand, so later command-line
        // flags override them under the take-last policy
        std::vector<std::string> tokens = args;
        const std::string path = config_path(args);
        if (!path.empty()) {
            auto it = std::find_if(tokens.begin(), tokens.end(), [&](const std::string& t) { return subs.count(t); });
            if (it == tokens.end()) throw UsageError("--config needs a subcommand");
            CLI::App* sub = subs[*it];
            std::vector<std::string> injected;
            for (const auto& [key, value] : read_config(path)) {
                if (key == "config" || !sub->get_option_no_throw("--" + key))
                    throw UsageError("unknown config key '" + key + "' for " + *it);
                injected.push_back("--" + key);
                injected.push_back(value);
            }
            tokens.insert(it + 1, injected.begin(), injected.end());
        }
        std::reverse(tokens.begin(), tokens.end());  // CLI11 consumes from the back
        app.parse(tokens);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    Outcome o;
    try {
        o = action();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedKindError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "FAIL " << chosen << ": " << e.what() << "\n";
        return 1;
    }

    if (output.empty()) {
        write_output(o, chosen, format, out);
    } else {
        std::ofstream f(output);
        if (!f) {
            err << "error: cannot write '" << output << "'\n";
            return 2;
        }
        write_output(o, chosen, format, f);
    }
    err << (o.pass ? "PASS " : "FAIL ") << chosen << ": " << o.quantity << " = " << sci(o.value, 3) << " (tolerance "
        << sci(o.tolerance, 1) << ")\n";
    return o.pass ? 0 : 1;
}

}  // namespace caustica::cli
