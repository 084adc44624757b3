#pragma once

// Taylor structure of the string-length defect Lambda(t) = L(0, t) - L(-t, 0)
// in the normalized Lazutkin parameter, the constants sigma_n, and the 4-jet ODE
// that rebuilds a curve with the string Poritsky property from one 4-jet.
//
// All lengths here are evaluated in quad precision: Lambda(t) sits about t^3
// below the lengths it is formed from, and the t^6 coefficient is recovered from
// values as small as 1e-20.
//
// Jets live in a conformal chart g = e^{2 phi} I of the surface:
//   euclidean   phi = 0
//   sphere      e^phi = 1 / (1 + r^2/4)   (stereographic, unit curvature)
//   hyperbolic  e^phi = 1 / (1 - r^2/4)   (scaled Poincare disk, curvature -1)
//   perturbed   e^{2 phi} = 1 + eps r^6   (flat to order five at the origin)
// The first three are normal charts at the origin to first order. Off the
// origin the vectors u = (1, b1) and w (projection of (0, 1) to u^perp) are
// measured in the chart metric.

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "caustica/convex_curve.hpp"

namespace caustica {

struct ChartMetric {
    enum class Kind { euclidean, sphere, hyperbolic, perturbed };
    Kind kind = Kind::euclidean;
    double epsilon = 0.0;  // perturbed only

    // euclidean | sphere | hyperbolic | perturbed:eps=<value>
    static ChartMetric parse(const std::string& spec);
    std::string name() const;
};

// Graph y = h(x) near x through the jet b_k = h^(k)(x); the graph is the Taylor
// polynomial of the jet (b may be longer than five entries).
struct GraphJet {
    double x = 0.0;
    std::vector<double> b;
};

struct Jet4 {
    double x = 0.0;
    std::array<double, 5> b{};  // b0..b4

    GraphJet with_b5(double b5) const;
};

// Geodesic curvature of the graph at the jet's base point; needs b1, b2.
double jet_curvature(const GraphJet& jet, const ChartMetric& metric);

struct LadderOptions {
    // largest t of the ladder in the normalized Lazutkin parameter, which is
    // about kappa(0) times arclength; 0.05 spans an arc of 0.05 / kappa(0)
    double t0 = 0.05;
    int levels = 8;  // t0 * 2^-k for k = 0 .. levels-1
    // repeat the fit on a ladder scaled by 2^-1/2 and report the difference
    bool error_estimate = true;
};

struct LambdaTaylor {
    // coefficients[i] estimates Lambda_hat_{i+3}, up to the requested order
    std::vector<double> coefficients;
    // |difference| between the two ladders, per coefficient (zero when not estimated)
    std::vector<double> error;
    std::vector<double> steps;  // the t values of the primary ladder
    double residual = 0.0;      // max |fit - data| relative to max |data| on the ladder

    double coefficient(int k) const { return coefficients.at(k - 3); }
    double error_of(int k) const { return error.at(k - 3); }
};

// Lambda_hat_3 .. Lambda_hat_order about the normalization point of a curve on a
// constant-curvature surface. Throws UnsupportedKindError on general charts and
// IllConditionedError when the ladder leaves the usable t-range.
LambdaTaylor lambda_taylor(const ConvexCurve& curve, int order, const LadderOptions& opts = {});
LambdaTaylor lambda_taylor(const GraphJet& jet, const ChartMetric& metric, int order,
                           const LadderOptions& opts = {});

// String lengths and Lambda of a graph jet in its own normalized Lazutkin
// parameter t about the base point (quad precision inside, double at the edges
// only for reporting).
class JetStrings {
public:
    JetStrings(const GraphJet& jet, const ChartMetric& metric);
    ~JetStrings();
    JetStrings(JetStrings&&) noexcept;

    double kappa0() const;
    // abscissa of the curve point at parameter t
    double x_at(double t) const;
    // L(0, t) and L(-t, 0) in quad precision, returned as their difference from
    // another JetStrings to keep the cancellation inside quad arithmetic
    double forward_length(double t) const;
    double forward_difference(const JetStrings& other, double t) const;
    double lambda(double t) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// (n-2)(n-3) / (6 (n+1)!) * |w| (|u| kappa)^-n; zero for n = 3 and even n.
double sigma_n(double kappa, double norm_w, double norm_u, int n);
double sigma_n(const GraphJet& j2, const ChartMetric& metric, int n);

struct B5Solution {
    double b5 = 0.0;
    double slope = 0.0;         // measured d Lambda_hat_6 / d b5
    double expected_slope = 0.0;  // sigma_5
    double lambda6_at_zero = 0.0;
};

// b5 making Lambda_hat_6 vanish, from two trial continuations b5 = 0 and b5 = 1.
// Throws ConvergenceError when the measured slope misses sigma_5 by over 5% on
// the ladder and on two successively halved ones.
B5Solution solve_b5(const Jet4& jet, const ChartMetric& metric, const LadderOptions& opts = {});

struct JetSample {
    double x = 0.0;
    std::array<double, 5> b{};
    double b5 = 0.0;
};

struct JetCurve {
    std::vector<JetSample> samples;  // sorted by x
    bool complete = true;
    std::string stop_reason;

    // cubic Hermite interpolation of b0 on the samples
    double y(double x) const;
};

// Integrates db_k = b_{k+1} dx (k < 4), db4 = solve_b5 dx with classical RK4
// over [x - range, x + range]. Stops early with complete = false when the curve
// loses convexity or solve_b5 fails.
JetCurve integrate_jet_ode(const Jet4& start, const ChartMetric& metric, double range, double step,
                           const LadderOptions& opts = {});

// Largest distance of the reconstructed points from the conic with the starting
// 4-jet (a geodesic conic on the sphere and hyperbolic charts). Distances are
// first-order |F| / |grad F| in the chart where those conics are plane conics:
// the chart itself, the gnomonic chart xi / (1 - r^2/4) or the Klein chart
// xi / (1 + r^2/4), all isometric to first order at the origin. Throws
// UnsupportedKindError for the perturbed metric, which has no conic oracle.
double conic_deviation(const Jet4& start, const ChartMetric& metric, const JetCurve& curve);

}  // namespace caustica
