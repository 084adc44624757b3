#pragma once

// Billiard ball map of a convex curve in (s, phi) and (s, y = 1 - cos phi)
// coordinates, the modified Lazutkin chart, and checks of the normal form and of
// the orbit asymptotics near the boundary.

#include <functional>
#include <utility>
#include <vector>

#include "caustica/convex_curve.hpp"

namespace caustica {

// y = 1 - cos(phi) and back, without cancellation for small angles.
double y_of_phi(double phi);
double phi_of_y(double y);

struct PhasePoint {
    double s = 0.0;
    double phi = 0.0;  // angle from the curve tangent, in [0, pi)
    double y() const { return y_of_phi(phi); }
    static PhasePoint from_y(double s, double y) { return {s, phi_of_y(y)}; }
};

// Reflect the geodesic g off the curve at its first hit ahead of g.point.
// Throws GeometryError when g misses the curve or hits it tangentially.
UnitTangent reflect(const ConvexCurve& curve, const UnitTangent& g);

// The chord leaving curve(s) at angle phi ends at curve(s'); returns s' (> s,
// unwrapped) and the angle phi' between the chord and the tangent at s'.
PhasePoint chord_step(const ConvexCurve& curve, const PhasePoint& q);

// delta_+(s, phi) = (s', phi') and the involution beta(s, phi) = (s', pi - phi'),
// with delta_+ = I o beta for I(s, phi) = (s, pi - phi).
PhasePoint billiard_step(const ConvexCurve& curve, const PhasePoint& q);
PhasePoint billiard_beta(const ConvexCurve& curve, const PhasePoint& q);

// Map of a strip {(x, y): y >= 0} fixing the x-axis, with its w(x).
struct WeaklyBilliardMap {
    std::function<std::pair<double, double>(double, double)> forward;
    std::function<double(double)> w;
    std::function<double(double)> w_prime;
    double x_lo = 0.0, x_hi = 0.0, y_max = 0.0;
};

// delta_+ in (s, y) by geometric reflection, with w(s) = 2 sqrt(2) / kappa(s).
// Phase box: s over the whole curve, y in (0, 0.1].
WeaklyBilliardMap billiard_map_sy(const ConvexCurve& curve);

// (x, y) -> (x + sqrt(y), y), the w == 1 model map.
WeaklyBilliardMap translation_map();

struct Jacobian2 {
    double a = 0, b = 0, c = 0, d = 0;  // [[ds'/ds, ds'/dy], [dy'/ds, dy'/dy]]
    double det() const { return a * d - b * c; }
};

// Central differences with Richardson extrapolation; steps h_x = 1e-3 and
// h_y = 0.05 y.
Jacobian2 jacobian(const WeaklyBilliardMap& f, double x, double y);

// X(x) = integral of w^{-2/3} from x0, Y(x, y) = w^{2/3}(x) y.
class LazutkinChart {
public:
    // Generic chart by quadrature of w.
    explicit LazutkinChart(std::function<double(double)> w, double x0 = 0.0);
    // Chart of a billiard map: X = t_L / 2 through the curve's length tables.
    static LazutkinChart for_billiard(const ConvexCurve& curve);

    double w(double x) const { return w_(x); }
    double X(double x) const { return x_of_(x); }
    double Y(double x, double y) const;
    std::pair<double, double> forward(double x, double y) const { return {X(x), Y(x, y)}; }
    double x_of(double X) const { return inverse_(X); }
    std::pair<double, double> inverse(double X, double Y) const;

private:
    LazutkinChart() = default;
    std::function<double(double)> w_, x_of_, inverse_;
};

struct NormalFormReport {
    std::vector<double> Y, dX, dY;
    double slope = 0.0;        // of log dX against log Y
    double coefficient = 0.0;  // exp(intercept)
    double max_dY_ratio = 0.0; // max |dY| / Y^{3/2}
    // Exponent of |dY| against Y (NaN when dY vanishes identically).
    double dY_exponent = 0.0;
    // f2 refinement: (y' - y) / y^{3/2} extrapolated to y -> 0, and its
    // predicted value -(2/3) w'(x).
    double f2_coefficient = 0.0;
    double f2_predicted = 0.0;
};

// Samples n logarithmically spaced Y in [Y_lo, Y_hi] at X = chart.X(x).
NormalFormReport normal_form_check(const WeaklyBilliardMap& f, const LazutkinChart& chart, double x, double Y_lo,
                                   double Y_hi, int n = 16);

struct OrbitRecord {
    std::vector<double> X, Y;
    long m = 0;          // largest j with X_i <= delta for all i <= j
    bool capped = false; // iteration budget reached
};

// Iterates q_{j+1} = F(q_j) from (X0, Y0) while X stays <= delta.
OrbitRecord orbit(const WeaklyBilliardMap& f, const LazutkinChart& chart, double X0, double Y0, double delta,
                  long budget = 1000000);

struct PlogStats {
    double alpha = 0.0;  // max_j |ln(Y_j / Y_0)|
    double beta = 0.0;   // smallest beta for both step and cumulative bands
    long m = 0;
};

PlogStats plog_bounds_check(const OrbitRecord& o);

// Whether e^{-beta} sqrt(Y_0) <= X_j - X_{j-1} <= e^{beta} sqrt(Y_0) and
// j e^{-beta} sqrt(Y_0) <= X_j - X_0 <= j e^{beta} sqrt(Y_0) for j = 1..m.
bool plog_bands_hold(const OrbitRecord& o, double beta);

}  // namespace caustica
