#pragma once

// Parametrized curves as templated functors. A functor maps a parameter of any
// scalar type S (double, Taylor<double, N>, Taylor<float128, 2>) to model
// coordinates std::array<S, 3>; wrapping it in FunctorCurve gives derivatives of
// every order the library needs, in double and in quad precision.

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <boost/multiprecision/float128.hpp>

#include "caustica/lifted.hpp"
#include "caustica/surface.hpp"
#include "caustica/taylor.hpp"

namespace caustica {

using float128 = boost::multiprecision::float128;
using QVec3 = lifted::V3<float128>;

class CurveModel {
public:
    virtual ~CurveModel() = default;
    // Model point and parameter derivatives up to the given order.
    virtual std::array<Vec3, 2> eval1(double u) const = 0;
    virtual std::array<Vec3, 3> eval2(double u) const = 0;
    virtual std::array<Vec3, 6> eval5(double u) const = 0;
    virtual std::array<QVec3, 3> eval2q(const float128& u) const = 0;

    double u_min = 0.0;
    double u_max = 1.0;
    bool periodic = false;
    std::string description;
};

template <class F>
class FunctorCurve final : public CurveModel {
public:
    FunctorCurve(F f, double lo, double hi, bool is_periodic, std::string desc, bool reversed = false)
        : f_(std::move(f)), reversed_(reversed) {
        u_min = reversed ? -hi : lo;
        u_max = reversed ? -lo : hi;
        periodic = is_periodic;
        description = std::move(desc);
    }

    std::array<Vec3, 2> eval1(double u) const override { return eval<double, 1>(u); }
    std::array<Vec3, 3> eval2(double u) const override { return eval<double, 2>(u); }
    std::array<Vec3, 6> eval5(double u) const override { return eval<double, 5>(u); }

    std::array<QVec3, 3> eval2q(const float128& u) const override {
        using J = Taylor<float128, 2>;
        J v = J::variable(u);
        if (reversed_) v = -v;
        std::array<J, 3> p = f_(v);
        std::array<QVec3, 3> out;
        for (int k = 0; k <= 2; ++k)
            for (int c = 0; c < 3; ++c) out[k][c] = p[c].derivative(k);
        return out;
    }

    const F& functor() const { return f_; }

private:
    template <class T, int N>
    std::array<Vec3, N + 1> eval(T u) const {
        using J = Taylor<T, N>;
        J v = J::variable(u);
        if (reversed_) v = -v;
        std::array<J, 3> p = f_(v);
        std::array<Vec3, N + 1> out;
        for (int k = 0; k <= N; ++k) out[k] = Vec3(p[0].derivative(k), p[1].derivative(k), p[2].derivative(k));
        return out;
    }

    F f_;
    bool reversed_;
};

namespace curves {

// Planar circle (x, y) = center + r (cos u, sin u).
struct Circle {
    double r, cx, cy;
    template <class S>
    std::array<S, 3> operator()(const S& u) const {
        using std::cos;
        using std::sin;
        return {S(cx) + S(r) * cos(u), S(cy) + S(r) * sin(u), S(0)};
    }
};

// Planar ellipse (a cos u, b sin u) about the origin.
struct Ellipse {
    double a, b;
    template <class S>
    std::array<S, 3> operator()(const S& u) const {
        using std::cos;
        using std::sin;
        return {S(a) * cos(u), S(b) * sin(u), S(0)};
    }
};

// Oval x^4 + y^4 = r^4 in polar form.
struct QuarticOval {
    double r;
    template <class S>
    std::array<S, 3> operator()(const S& u) const {
        using std::cos;
        using std::pow;
        using std::sin;
        S c = cos(u), s = sin(u);
        S c2 = c * c, s2 = s * s;
        S rho = S(r) * pow(c2 * c2 + s2 * s2, decltype(value_of(c))(-0.25));
        return {rho * c, rho * s, S(0)};
    }

private:
    template <class S>
    static auto value_of(const S& s) {
        if constexpr (is_taylor<S>::value)
            return s.value();
        else
            return s;
    }
};

// Graph y = sum_{k=1}^{5} b_k x^k / k! in a chart, lifted to the model:
// kind 0 takes the plane itself, kind +1 the gnomonic chart about the north pole
// and kind -1 the Klein chart about the disk center.
struct ChartGraph {
    int kind = 0;
    std::array<double, 6> b{};  // b[0] .. b[5]
    template <class S>
    std::array<S, 3> operator()(const S& x) const {
        using std::sqrt;
        S h(0), xk(1);
        double fact = 1.0;
        for (int k = 0; k <= 5; ++k) {
            if (k > 0) {
                xk = xk * x;
                fact *= k;
            }
            h = h + S(b[k] / fact) * xk;
        }
        return chart_to_model(kind, x, h);
    }

    template <class S>
    static std::array<S, 3> chart_to_model(int kind, const S& x, const S& y) {
        using std::sqrt;
        if (kind == 0) return {x, y, S(0)};
        if (kind > 0) {
            S n = sqrt(S(1) + x * x + y * y);
            return {x / n, y / n, S(1) / n};
        }
        // Klein (k) to Poincare: z = k / (1 + sqrt(1 - |k|^2))
        S d = S(1) + sqrt(S(1) - x * x - y * y);
        return {x / d, y / d, S(0)};
    }
};

// Rationally parametrized conic { X^T C X = 0 } through the lifted base point B:
// X(theta) = -Q(P) B + 2 (B^T C P) P with P = cos(theta) E1 + sin(theta) E2; the
// map has period pi and never vanishes, and is normalized onto the model.
struct Conic {
    int kind = 0;
    std::array<std::array<double, 3>, 3> c{};
    std::array<double, 3> base{}, e1{}, e2{};
    double sign = 1.0;

    template <class S>
    std::array<S, 3> operator()(const S& th) const {
        using std::cos;
        using std::sin;
        using std::sqrt;
        S ct = cos(th), st = sin(th);
        std::array<S, 3> p;
        for (int i = 0; i < 3; ++i) p[i] = S(e1[i]) * ct + S(e2[i]) * st;
        std::array<S, 3> cp;
        for (int i = 0; i < 3; ++i) cp[i] = S(c[i][0]) * p[0] + S(c[i][1]) * p[1] + S(c[i][2]) * p[2];
        S q = p[0] * cp[0] + p[1] * cp[1] + p[2] * cp[2];
        S bcp = S(base[0]) * cp[0] + S(base[1]) * cp[1] + S(base[2]) * cp[2];
        std::array<S, 3> x;
        for (int i = 0; i < 3; ++i) x[i] = S(sign) * (S(-1) * q * S(base[i]) + S(2) * bcp * p[i]);
        if (kind == 0) return {x[0] / x[2], x[1] / x[2], S(0)};
        if (kind > 0) {
            S n = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            return {x[0] / n, x[1] / n, x[2] / n};
        }
        S n = sqrt(x[2] * x[2] - x[0] * x[0] - x[1] * x[1]);
        S d = n + x[2];
        return {x[0] / d, x[1] / d, S(0)};
    }
};

// Closed curve given by truncated Fourier series of its model coordinates in a
// parameter of period `period`; on the sphere the result is renormalized.
struct Fourier {
    int kind = 0;
    double period = 2.0 * M_PI;
    std::array<std::vector<double>, 3> cos_coef, sin_coef;  // index 0 of cos is the mean

    template <class S>
    std::array<S, 3> operator()(const S& u) const {
        using std::cos;
        using std::sin;
        using std::sqrt;
        const std::size_t n = cos_coef[0].size();
        std::array<S, 3> out{S(cos_coef[0][0]), S(cos_coef[1][0]), S(cos_coef[2][0])};
        S w = S(2.0 * M_PI / period) * u;
        for (std::size_t k = 1; k < n; ++k) {
            S kw = S(double(k)) * w;
            S ck = cos(kw), sk = sin(kw);
            for (int c = 0; c < 3; ++c) out[c] = out[c] + S(cos_coef[c][k]) * ck + S(sin_coef[c][k]) * sk;
        }
        if (kind > 0) {
            S nn = sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2]);
            return {out[0] / nn, out[1] / nn, out[2] / nn};
        }
        out[2] = S(0);
        return out;
    }
};

}  // namespace curves

template <class F>
std::shared_ptr<const CurveModel> make_model(F f, double lo, double hi, bool periodic, std::string desc,
                                             bool reversed = false) {
    return std::make_shared<FunctorCurve<F>>(std::move(f), lo, hi, periodic, std::move(desc), reversed);
}

}  // namespace caustica
