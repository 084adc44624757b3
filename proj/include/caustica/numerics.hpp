#pragma once

// Small numerical building blocks shared by the geometry modules.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "caustica/errors.hpp"

namespace caustica {

// Fixed-order Gauss-Legendre rule on [a, b], split into equal panels.
template <int Order = 20, class S, class F>
S integrate_gl(F&& f, S a, S b, int panels = 1) {
    S total(0);
    S h = (b - a) / S(panels);
    for (int i = 0; i < panels; ++i) {
        S lo = a + S(i) * h;
        S hi = (i + 1 == panels) ? b : lo + h;
        total += boost::math::quadrature::gauss<S, Order>::integrate(f, lo, hi);
    }
    return total;
}

// Root of f inside [a, b] given opposite-signed end values. Throws RangeError
// when the interval does not bracket a sign change.
template <class F>
double solve_bracketed(F&& f, double a, double b, double fa, double fb, double xtol = 0.0) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) throw RangeError("root not bracketed");
    const double eps = std::numeric_limits<double>::epsilon();
    auto tol = [xtol, eps](double l, double r) {
        return std::abs(r - l) <= std::max(xtol, 4.0 * eps * std::max(std::abs(l), std::abs(r)));
    };
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    return 0.5 * (r.first + r.second);
}

// Scan [a, b] in n equal steps and return the first sub-interval where f changes
// sign, then solve inside it.
template <class F>
double first_root_in(F&& f, double a, double b, int n, double xtol = 0.0) {
    double x0 = a, f0 = f(a);
    for (int i = 1; i <= n; ++i) {
        double x1 = a + (b - a) * double(i) / double(n);
        double f1 = f(x1);
        if (f0 == 0.0) return x0;
        if ((f0 > 0.0) != (f1 > 0.0)) return solve_bracketed(f, x0, x1, f0, f1, xtol);
        x0 = x1;
        f0 = f1;
    }
    throw RangeError("no sign change found in scan interval");
}

// Minimizer of a unimodal function on [a, b].
template <class F>
double minimize_brent(F&& f, double a, double b) {
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::brent_find_minima(f, a, b, std::numeric_limits<double>::digits / 2, iters);
    return r.first;
}

// Central difference with Richardson extrapolation over `levels` step halvings.
template <class F>
double richardson_derivative(F&& f, double x, double h, int levels = 3) {
    std::vector<std::vector<double>> t(levels, std::vector<double>(levels, 0.0));
    for (int i = 0; i < levels; ++i) {
        double hi = h / double(1 << i);
        t[i][0] = (f(x + hi) - f(x - hi)) / (2.0 * hi);
        double pow4 = 1.0;
        for (int j = 1; j <= i; ++j) {
            pow4 *= 4.0;
            t[i][j] = t[i][j - 1] + (t[i][j - 1] - t[i - 1][j - 1]) / (pow4 - 1.0);
        }
    }
    return t[levels - 1][levels - 1];
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_norm = 0.0;
};

// Least-squares line y = slope * x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("fit_line needs at least two matching samples");
    Eigen::MatrixXd a(x.size(), 2);
    Eigen::VectorXd b(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        a(i, 0) = x[i];
        a(i, 1) = 1.0;
        b(i) = y[i];
    }
    Eigen::Vector2d sol = a.colPivHouseholderQr().solve(b);
    return {sol(0), sol(1), (a * sol - b).norm()};
}

inline std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        double f = n == 1 ? 0.0 : double(i) / double(n - 1);
        v[i] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
    }
    return v;
}

// Worker count: CAUSTICA_THREADS if set and positive, else the hardware count.
inline int thread_count() {
    if (const char* env = std::getenv("CAUSTICA_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

// Evaluates f(0..n-1) on a small thread pool; results are stored by index so
// the output never depends on scheduling. The exception of the lowest failing
// index is rethrown.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, F&& f) {
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    int workers = std::min<int>(thread_count(), int(n));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace caustica
