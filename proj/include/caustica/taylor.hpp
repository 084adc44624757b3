#pragma once

// Truncated Taylor arithmetic. A Taylor<T, N> holds the normalized
// coefficients c[k] = f^(k)(u0) / k! of a function of one variable, so
// evaluating a templated curve on Taylor<T, N>::variable(u0) yields all
// derivatives up to order N at u0.

#include <array>
#include <cmath>
#include <type_traits>

namespace caustica {

template <class T, int N>
class Taylor;

template <class U>
struct is_taylor : std::false_type {};
template <class T, int N>
struct is_taylor<Taylor<T, N>> : std::true_type {};

template <class T, int N>
class Taylor {
public:
    static_assert(N >= 0);
    std::array<T, N + 1> c{};

    Taylor() { c.fill(T(0)); }

    template <class U>
        requires(!is_taylor<std::decay_t<U>>::value && std::is_constructible_v<T, U>)
    Taylor(const U& v) {
        c.fill(T(0));
        c[0] = T(v);
    }

    static Taylor variable(const T& u0) {
        Taylor r(u0);
        if constexpr (N >= 1) r.c[1] = T(1);
        return r;
    }

    const T& value() const { return c[0]; }

    // k-th derivative (not the normalized coefficient)
    T derivative(int k) const {
        T f(1);
        for (int i = 2; i <= k; ++i) f *= T(i);
        return c[k] * f;
    }

    Taylor operator-() const {
        Taylor r;
        for (int k = 0; k <= N; ++k) r.c[k] = -c[k];
        return r;
    }

    Taylor& operator+=(const Taylor& o) {
        for (int k = 0; k <= N; ++k) c[k] += o.c[k];
        return *this;
    }
    Taylor& operator-=(const Taylor& o) {
        for (int k = 0; k <= N; ++k) c[k] -= o.c[k];
        return *this;
    }
    Taylor& operator*=(const Taylor& o) { return *this = *this * o; }
    Taylor& operator/=(const Taylor& o) { return *this = *this / o; }

    friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
    friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }

    friend Taylor operator*(const Taylor& a, const Taylor& b) {
        Taylor r;
        for (int k = 0; k <= N; ++k) {
            T s(0);
            for (int j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
            r.c[k] = s;
        }
        return r;
    }

    friend Taylor operator/(const Taylor& a, const Taylor& b) {
        Taylor q;
        for (int k = 0; k <= N; ++k) {
            T s = a.c[k];
            for (int j = 1; j <= k; ++j) s -= b.c[j] * q.c[k - j];
            q.c[k] = s / b.c[0];
        }
        return q;
    }

    friend Taylor sqrt(const Taylor& a) {
        using std::sqrt;
        Taylor r;
        r.c[0] = sqrt(a.c[0]);
        for (int k = 1; k <= N; ++k) {
            T s = a.c[k];
            for (int j = 1; j < k; ++j) s -= r.c[j] * r.c[k - j];
            r.c[k] = s / (T(2) * r.c[0]);
        }
        return r;
    }

    friend Taylor exp(const Taylor& a) {
        using std::exp;
        Taylor r;
        r.c[0] = exp(a.c[0]);
        for (int k = 1; k <= N; ++k) {
            T s(0);
            for (int j = 1; j <= k; ++j) s += T(j) * a.c[j] * r.c[k - j];
            r.c[k] = s / T(k);
        }
        return r;
    }

    friend Taylor log(const Taylor& a) {
        using std::log;
        Taylor r;
        r.c[0] = log(a.c[0]);
        for (int k = 1; k <= N; ++k) {
            T s(0);
            for (int j = 1; j < k; ++j) s += T(j) * r.c[j] * a.c[k - j];
            r.c[k] = (a.c[k] - s / T(k)) / a.c[0];
        }
        return r;
    }

    // a^alpha for a(u0) > 0
    friend Taylor pow(const Taylor& a, const T& alpha) {
        using std::pow;
        Taylor r;
        r.c[0] = pow(a.c[0], alpha);
        for (int k = 1; k <= N; ++k) {
            T s(0);
            for (int j = 1; j <= k; ++j) s += (alpha * T(j) - T(k - j)) * a.c[j] * r.c[k - j];
            r.c[k] = s / (T(k) * a.c[0]);
        }
        return r;
    }

    friend void sincos(const Taylor& a, Taylor& s, Taylor& co) {
        using std::cos;
        using std::sin;
        s.c[0] = sin(a.c[0]);
        co.c[0] = cos(a.c[0]);
        for (int k = 1; k <= N; ++k) {
            T ss(0), cc(0);
            for (int j = 1; j <= k; ++j) {
                ss += T(j) * a.c[j] * co.c[k - j];
                cc += T(j) * a.c[j] * s.c[k - j];
            }
            s.c[k] = ss / T(k);
            co.c[k] = -cc / T(k);
        }
    }
    friend Taylor sin(const Taylor& a) {
        Taylor s, co;
        sincos(a, s, co);
        return s;
    }
    friend Taylor cos(const Taylor& a) {
        Taylor s, co;
        sincos(a, s, co);
        return co;
    }

    friend void sinhcosh(const Taylor& a, Taylor& s, Taylor& ch) {
        using std::cosh;
        using std::sinh;
        s.c[0] = sinh(a.c[0]);
        ch.c[0] = cosh(a.c[0]);
        for (int k = 1; k <= N; ++k) {
            T ss(0), cc(0);
            for (int j = 1; j <= k; ++j) {
                ss += T(j) * a.c[j] * ch.c[k - j];
                cc += T(j) * a.c[j] * s.c[k - j];
            }
            s.c[k] = ss / T(k);
            ch.c[k] = cc / T(k);
        }
    }
    friend Taylor sinh(const Taylor& a) {
        Taylor s, ch;
        sinhcosh(a, s, ch);
        return s;
    }
    friend Taylor cosh(const Taylor& a) {
        Taylor s, ch;
        sinhcosh(a, s, ch);
        return ch;
    }
};

}  // namespace caustica
