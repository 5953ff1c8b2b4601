#pragma once

// Independent oracles used by the test suites. Everything here is written
// against textbook formulas only and must not call into uve/ evaluation
// paths, so that a library bug cannot hide behind a shared code path.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracles {

using cd = std::complex<double>;

/// Klein j-invariant from the E4/E6 q-series, j = 1728 E4^3 / (E4^3 - E6^2).
inline cd j_from_tau(const cd &tau) {
    const double pi = 3.14159265358979323846;
    const cd qq = std::exp(cd(0, 2 * pi) * tau);
    cd e4(1), e6(1), qn = qq;
    for (int n = 1; n < 64; ++n) {
        const double nn = n;
        const cd f = qn / (1.0 - qn);
        e4 += 240.0 * nn * nn * nn * f;
        e6 -= 504.0 * nn * nn * nn * nn * nn * f;
        qn *= qq;
        if (std::abs(qn) < 1e-30) break;
    }
    const cd e43 = e4 * e4 * e4;
    return 1728.0 * e43 / (e43 - e6 * e6);
}

/// j-invariant straight from the invariants.
inline cd j_from_invariants(const cd &g2, const cd &g3) {
    const cd g23 = g2 * g2 * g2;
    return 1728.0 * g23 / (g23 - 27.0 * g3 * g3);
}

/// All real roots of 4x^3 - g2 x - g3 for real g2, g3, by sign-change
/// bisection on a bracketing grid. Plain root solver, no closed forms.
inline std::vector<double> real_cubic_roots(double g2, double g3) {
    auto f = [&](double x) { return ((4 * x * x - g2) * x) - g3; };
    const double bound = 1.0 + std::max(std::abs(g2), std::abs(g3));
    std::vector<double> roots;
    const int steps = 4000;
    double prev_x = -bound, prev_f = f(prev_x);
    for (int i = 1; i <= steps; ++i) {
        const double x = -bound + 2 * bound * i / steps;
        const double fx = f(x);
        if (prev_f == 0.0) {
            roots.push_back(prev_x);
        } else if ((prev_f < 0) != (fx < 0)) {
            double lo = prev_x, hi = x, flo = prev_f;
            for (int it = 0; it < 200; ++it) {
                const double mid = (lo + hi) / 2;
                const double fm = f(mid);
                if ((flo < 0) == (fm < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back((lo + hi) / 2);
        }
        prev_x = x;
        prev_f = fx;
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double r : roots) {
        if (unique.empty() || r - unique.back() > 1e-7 * bound) unique.push_back(r);
    }
    return unique;
}

/// Random invariants with the discriminant bounded away from zero.
inline std::pair<cd, cd> random_invariants(std::mt19937_64 &rng, bool real_only = false) {
    std::uniform_real_distribution<double> box(-3.0, 3.0);
    for (;;) {
        cd g2(box(rng), real_only ? 0.0 : box(rng));
        cd g3(box(rng), real_only ? 0.0 : box(rng));
        const cd delta = g2 * g2 * g2 - 27.0 * g3 * g3;
        const double scale = std::max({1.0, std::norm(g2), std::norm(g3)});
        if (std::abs(delta) > 0.05 * scale) return {g2, g3};
    }
}

} // namespace oracles
