#pragma once

// Constant-curvature geometry in lifted (homogeneous) coordinates, generic in
// the scalar type so that the same formulas serve double and quad precision.
//
//   K = 0   Euclidean plane: point (x, y) lifts to (x, y, 1), tangent to (vx, vy, 0).
//   K = +1  unit sphere in R^3: points and tangents are used as they are.
//   K = -1  Poincare disk (x, y) lifts to the hyperboloid sheet
//           X = (2x, 2y, 1 + r^2) / (1 - r^2) with the form x0 y0 + x1 y1 - x2 y2.
//
// Geodesics are intersections of the model with planes through the origin, so
// incidence questions reduce to cross products in R^3.

#include <array>
#include <cmath>

namespace caustica::lifted {

template <class S>
using V3 = std::array<S, 3>;

template <class S>
V3<S> add(const V3<S>& a, const V3<S>& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
template <class S>
V3<S> sub(const V3<S>& a, const V3<S>& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
template <class S, class T>
V3<S> scale(const V3<S>& a, const T& k) {
    return {a[0] * k, a[1] * k, a[2] * k};
}
template <class S>
S dot(const V3<S>& a, const V3<S>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
template <class S>
V3<S> cross(const V3<S>& a, const V3<S>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
template <class S>
S det(const V3<S>& a, const V3<S>& b, const V3<S>& c) {
    return dot(a, cross(b, c));
}

// Bilinear form of the model on lifted tangent vectors.
template <class S>
S inner(int k, const V3<S>& a, const V3<S>& b) {
    if (k < 0) return a[0] * b[0] + a[1] * b[1] - a[2] * b[2];
    if (k > 0) return dot(a, b);
    return a[0] * b[0] + a[1] * b[1];
}

template <class S>
S norm(int k, const V3<S>& a) {
    using std::sqrt;
    return sqrt(inner(k, a, a));
}

// Works for any scalar supporting field operations (including Taylor series).
template <class S>
V3<S> lift_point(int k, const V3<S>& p) {
    if (k == 0) return {p[0], p[1], S(1)};
    if (k > 0) return p;
    S r2 = p[0] * p[0] + p[1] * p[1];
    S d = S(1) - r2;
    return {S(2) * p[0] / d, S(2) * p[1] / d, (S(1) + r2) / d};
}

template <class S>
V3<S> lift_tangent(int k, const V3<S>& p, const V3<S>& v) {
    if (k == 0) return {v[0], v[1], S(0)};
    if (k > 0) return v;
    const S& x = p[0];
    const S& y = p[1];
    S d = S(1) - x * x - y * y;
    S d2 = d * d;
    return {((S(2) * d + S(4) * x * x) * v[0] + S(4) * x * y * v[1]) / d2,
            (S(4) * x * y * v[0] + (S(2) * d + S(4) * y * y) * v[1]) / d2,
            S(4) * (x * v[0] + y * v[1]) / d2};
}

template <class S>
V3<S> drop_point(int k, const V3<S>& x) {
    if (k == 0) return {x[0] / x[2], x[1] / x[2], S(0)};
    if (k > 0) return x;
    S d = S(1) + x[2];
    return {x[0] / d, x[1] / d, S(0)};
}

template <class S>
V3<S> drop_tangent(int k, const V3<S>& x, const V3<S>& v) {
    if (k == 0) return {v[0] / x[2] - x[0] * v[2] / (x[2] * x[2]), v[1] / x[2] - x[1] * v[2] / (x[2] * x[2]), S(0)};
    if (k > 0) return v;
    S d = S(1) + x[2];
    return {v[0] / d - x[0] * v[2] / (d * d), v[1] / d - x[1] * v[2] / (d * d), S(0)};
}

// Normalizes a nonzero direction D of R^3 to a model point. Returns false when
// D does not represent a point of the model (Euclidean point at infinity,
// non-timelike direction on the hyperbolic side). On the sphere the
// representative with positive dot product against `near` is chosen.
template <class S>
bool normalize_point(int k, const V3<S>& d, const V3<S>& near, V3<S>& out) {
    using std::sqrt;
    if (k == 0) {
        if (d[2] == S(0)) return false;
        out = {d[0] / d[2], d[1] / d[2], S(1)};
        return true;
    }
    if (k > 0) {
        S n = sqrt(dot(d, d));
        if (n == S(0)) return false;
        out = scale(d, (dot(d, near) < S(0) ? S(-1) : S(1)) / n);
        return true;
    }
    S q = -inner(k, d, d);
    if (!(q > S(0))) return false;
    out = scale(d, (d[2] < S(0) ? S(-1) : S(1)) / sqrt(q));
    return true;
}

// Geodesic flow of a unit lifted tangent (x, v) for time t.
template <class S>
void flow(int k, const V3<S>& x, const V3<S>& v, const S& t, V3<S>& x_out, V3<S>& v_out) {
    using std::cos;
    using std::cosh;
    using std::sin;
    using std::sinh;
    if (k == 0) {
        x_out = add(x, scale(v, t));
        v_out = v;
    } else if (k > 0) {
        S c = cos(t), s = sin(t);
        x_out = add(scale(x, c), scale(v, s));
        v_out = sub(scale(v, c), scale(x, s));
    } else {
        S c = cosh(t), s = sinh(t);
        x_out = add(scale(x, c), scale(v, s));
        v_out = add(scale(v, c), scale(x, s));
    }
}

// Distance between lifted points, written to avoid cancellation for close points.
template <class S>
S distance(int k, const V3<S>& x, const V3<S>& y) {
    using std::asinh;
    using std::atan2;
    using std::sqrt;
    if (k == 0) {
        S dx = x[0] / x[2] - y[0] / y[2], dy = x[1] / x[2] - y[1] / y[2];
        return sqrt(dx * dx + dy * dy);
    }
    if (k > 0) {
        V3<S> c = cross(x, y);
        return atan2(sqrt(dot(c, c)), dot(x, y));
    }
    V3<S> d = sub(x, y);
    S q = inner(k, d, d);
    if (q < S(0)) q = S(0);
    return S(2) * asinh(sqrt(q) / S(2));
}

// Signed flow time along the unit geodesic (x, v) of a point y lying on it.
template <class S>
S position_on(int k, const V3<S>& x, const V3<S>& v, const V3<S>& y) {
    using std::asinh;
    using std::atan2;
    if (k == 0) return (y[0] / y[2] - x[0] / x[2]) * v[0] + (y[1] / y[2] - x[1] / x[2]) * v[1];
    if (k > 0) return atan2(dot(y, v), dot(y, x));
    return asinh(inner(k, y, v));
}

// Unit lifted tangent at x pointing along the minimizing geodesic to y.
template <class S>
V3<S> toward(int k, const V3<S>& x, const V3<S>& y) {
    V3<S> w;
    if (k == 0) {
        w = sub(scale(y, S(1) / y[2]), scale(x, S(1) / x[2]));
        w[2] = S(0);
    } else if (k > 0) {
        w = sub(y, scale(x, dot(x, y)));
    } else {
        w = add(y, scale(x, inner(k, x, y)));
    }
    return scale(w, S(1) / norm(k, w));
}

// Signed offset of y from the oriented geodesic (x, v): the signed distance on
// the plane, its sine on the sphere and its hyperbolic sine on the disk.
// Positive on the left.
template <class S>
S side(int k, const V3<S>& x, const V3<S>& v, const V3<S>& y) {
    if (k == 0) return det(x, v, scale(y, S(1) / y[2])) / x[2];
    return det(x, v, y);
}

}  // namespace caustica::lifted
