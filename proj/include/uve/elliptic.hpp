#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace uve {

template <typename T>
using cplx = std::complex<T>;

/// Weierstrass invariants of a curve y^2 = 4x^3 - g2 x - g3.
template <typename T>
struct curve_invariants {
    cplx<T> g2{};
    cplx<T> g3{};

    cplx<T> discriminant() const { return g2 * g2 * g2 - T(27) * g3 * g3; }
};

/// Lattice generators omega1, omega2 together with the zeta increments
/// eta1, eta2 for translation by them. Oriented bases have Im(omega2/omega1) > 0
/// and satisfy the Legendre relation eta1*omega2 - eta2*omega1 = 2*pi*i.
template <typename T>
struct period_matrix {
    cplx<T> omega1{};
    cplx<T> omega2{};
    cplx<T> eta1{};
    cplx<T> eta2{};

    cplx<T> tau() const { return omega2 / omega1; }

    cplx<T> legendre_residual() const {
        return eta1 * omega2 - eta2 * omega1 - cplx<T>(0, 2 * std::numbers::pi_v<T>);
    }
};

namespace detail {

template <typename T>
bool is_finite(const cplx<T> &c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
}

/// Roots of the cubic 4x^3 - g2 x - g3, Newton-polished.
template <typename T>
std::array<cplx<T>, 3> weierstrass_cubic_roots(const cplx<T> &g2, const cplx<T> &g3) {
    const cplx<T> p = -g2 / T(4);
    const cplx<T> q = -g3 / T(4);
    std::array<cplx<T>, 3> roots{};
    if (std::abs(p) == T(0) && std::abs(q) == T(0)) {
        return roots;
    }
    const cplx<T> s = std::sqrt(q * q / T(4) + p * p * p / T(27));
    cplx<T> u3 = -q / T(2) + s;
    if (std::abs(-q / T(2) - s) > std::abs(u3)) {
        u3 = -q / T(2) - s;
    }
    const cplx<T> u = std::pow(u3, cplx<T>(T(1) / T(3)));
    const cplx<T> zeta3(T(-1) / T(2), std::sqrt(T(3)) / T(2));
    cplx<T> w = u;
    for (int k = 0; k < 3; ++k) {
        roots[k] = (std::abs(w) == T(0)) ? cplx<T>{} : w - p / (T(3) * w);
        w *= zeta3;
    }
    for (auto &x : roots) {
        for (int it = 0; it < 3; ++it) {
            const cplx<T> f = (T(4) * x * x - g2) * x - g3;
            const cplx<T> df = T(12) * x * x - g2;
            if (std::abs(df) > T(0)) {
                x -= f / df;
            }
        }
    }
    return roots;
}

/// Arithmetic-geometric mean with the optimal square-root branch:
/// at each step the sign of sqrt(a*b) is chosen so that |a'-b'| <= |a'+b'|.
template <typename T>
cplx<T> agm_optimal(cplx<T> a, cplx<T> b) {
    const T eps = std::numeric_limits<T>::epsilon();
    for (int i = 0; i < 80; ++i) {
        if (std::abs(a - b) <= T(4) * eps * (std::abs(a) + std::abs(b))) {
            break;
        }
        const cplx<T> am = (a + b) / T(2);
        cplx<T> gm = std::sqrt(a * b);
        if (std::abs(am - gm) > std::abs(am + gm)) {
            gm = -gm;
        }
        a = am;
        b = gm;
    }
    return (a + b) / T(2);
}

/// g2, g3 of the lattice omega1*(Z + tau*Z) via the Eisenstein q-series
/// E4 and E6. Converges fast once Im(tau) is bounded away from 0.
template <typename T>
std::pair<cplx<T>, cplx<T>> eisenstein_invariants(const cplx<T> &tau, const cplx<T> &omega1) {
    const T pi = std::numbers::pi_v<T>;
    const T eps = std::numeric_limits<T>::epsilon();
    const cplx<T> qq = std::exp(cplx<T>(0, 2 * pi) * tau);
    cplx<T> e4(1), e6(1), qn = qq;
    for (int n = 1; n < 64; ++n) {
        const T nn = T(n);
        const cplx<T> f = qn / (T(1) - qn);
        e4 += T(240) * nn * nn * nn * f;
        e6 -= T(504) * nn * nn * nn * nn * nn * f;
        qn *= qq;
        const T next = nn + 1;
        if (std::abs(qn) * T(504) * next * next * next * next * next < eps) {
            break;
        }
    }
    const T pi2 = pi * pi;
    const cplx<T> w2 = omega1 * omega1;
    const cplx<T> w4 = w2 * w2;
    const cplx<T> g2 = (T(4) * pi2 * pi2 / T(3)) * e4 / w4;
    const cplx<T> g3 = (T(8) * pi2 * pi2 * pi2 / T(27)) * e6 / (w4 * w2);
    return {g2, g3};
}

/// Reduces a basis so tau = w2/w1 lies in the standard fundamental domain
/// (|tau| >= 1, -1/2 <= Re tau < 1/2, and Re tau <= 0 when |tau| = 1).
/// The same unimodular moves are applied to (e1, e2) when supplied, so a
/// quasi-period pair stays attached to its lattice basis.
template <typename T>
bool reduce_basis(cplx<T> &w1, cplx<T> &w2, cplx<T> *e1 = nullptr, cplx<T> *e2 = nullptr) {
    const T beps = T(64) * std::numeric_limits<T>::epsilon();
    auto invert = [&] {
        std::swap(w1, w2);
        w2 = -w2;
        if (e1) {
            std::swap(*e1, *e2);
            *e2 = -*e2;
        }
    };
    if (std::abs(w1) == T(0)) {
        return false;
    }
    if (std::imag(w2 / w1) < T(0)) {
        // plain swap: the one orientation-reversing move, applied at most once
        std::swap(w1, w2);
        if (e1) {
            std::swap(*e1, *e2);
        }
    }
    for (int i = 0; i < 256; ++i) {
        cplx<T> tau = w2 / w1;
        if (!is_finite(tau)) {
            return false;
        }
        const T n = std::floor(tau.real() + T(1) / T(2));
        if (n != T(0)) {
            w2 -= n * w1;
            if (e2) {
                *e2 -= n * *e1;
            }
            tau = w2 / w1;
        }
        const T a = std::abs(tau);
        if (a < T(1) - beps) {
            invert();
            continue;
        }
        if (a <= T(1) + beps && tau.real() > beps) {
            invert();
            continue;
        }
        return std::imag(tau) > T(0);
    }
    return false;
}

/// Flips the sign of the whole basis so omega1 points into the closed right
/// half plane (upper imaginary axis on ties). -Lattice = lattice, so this is
/// a free normalization.
template <typename T>
void canonicalize_sign(cplx<T> &w1, cplx<T> &w2, cplx<T> *e1 = nullptr, cplx<T> *e2 = nullptr) {
    const T tiny = T(64) * std::numeric_limits<T>::epsilon() * std::abs(w1);
    const bool flip = w1.real() < -tiny || (std::abs(w1.real()) <= tiny && w1.imag() < T(0));
    if (flip) {
        w1 = -w1;
        w2 = -w2;
        if (e1) {
            *e1 = -*e1;
            *e2 = -*e2;
        }
    }
}

template <typename T>
struct theta_values {
    cplx<T> t1;  // theta_1(u)
    cplx<T> t1d; // d/du theta_1(u)
    cplx<T> t2;  // theta_2(u)
    cplx<T> t2d; // d/du theta_2(u)
};

/// theta_1, theta_2 and their u-derivatives from the sine/cosine q-series.
/// Assumes |q| is small enough for rapid convergence, which holds after the
/// basis has been reduced to the fundamental domain and u to the centered cell.
template <typename T>
theta_values<T> theta_at(const cplx<T> &u, const cplx<T> &q) {
    const T eps = std::numeric_limits<T>::epsilon();
    const cplx<T> q2 = q * q;
    cplx<T> p = std::pow(q, cplx<T>(T(1) / T(4)));
    cplx<T> r = q2;
    cplx<T> s = std::sin(u), c = std::cos(u);
    const cplx<T> s2 = T(2) * s * c;
    const cplx<T> c2 = c * c - s * s;
    cplx<T> t1{}, t1d{}, t2{}, t2d{};
    T sign = 1;
    int quiet = 0;
    for (int n = 0; n < 64; ++n) {
        const T k = T(2 * n + 1);
        const cplx<T> ps = p * s, pc = p * c;
        t1 += sign * ps;
        t1d += sign * k * pc;
        t2 += pc;
        t2d -= k * ps;
        const T inc = std::abs(p) * (std::abs(s) + std::abs(c)) * k;
        const T mag = std::abs(t1) + std::abs(t2) + T(1e-300);
        if (inc <= eps * mag) {
            if (++quiet >= 2) {
                return {T(2) * t1, T(2) * t1d, T(2) * t2, T(2) * t2d};
            }
        } else {
            quiet = 0;
        }
        p *= r;
        r *= q2;
        const cplx<T> ns = s * c2 + c * s2;
        const cplx<T> nc = c * c2 - s * s2;
        s = ns;
        c = nc;
        sign = -sign;
    }
    return {T(2) * t1, T(2) * t1d, T(2) * t2, T(2) * t2d};
}

template <typename T>
struct theta_constants {
    cplx<T> t2;    // theta_2(0)
    cplx<T> t3;    // theta_3(0)
    cplx<T> t4;    // theta_4(0)
    cplx<T> t1d;   // theta_1'(0)
    cplx<T> t1d3;  // theta_1'''(0)
};

template <typename T>
theta_constants<T> theta_constants_at(const cplx<T> &q) {
    const T eps = std::numeric_limits<T>::epsilon();
    const cplx<T> q2 = q * q;
    theta_constants<T> tc{};
    // Half-integer exponent family: q^{(n+1/2)^2}.
    {
        cplx<T> p = std::pow(q, cplx<T>(T(1) / T(4)));
        cplx<T> r = q2;
        T sign = 1;
        cplx<T> s2{}, sd{}, sd3{};
        for (int n = 0; n < 64; ++n) {
            const T k = T(2 * n + 1);
            s2 += p;
            sd += sign * k * p;
            sd3 += sign * k * k * k * p;
            if (std::abs(p) * k * k * k <= eps * (std::abs(sd3) + T(1e-300)) && n > 0) {
                break;
            }
            p *= r;
            r *= q2;
            sign = -sign;
        }
        tc.t2 = T(2) * s2;
        tc.t1d = T(2) * sd;
        tc.t1d3 = -T(2) * sd3;
    }
    // Integer exponent family: q^{n^2}.
    {
        cplx<T> p = q;
        cplx<T> r = q2 * q;
        T sign = -1;
        cplx<T> s3(1), s4(1);
        for (int n = 1; n < 64; ++n) {
            s3 += T(2) * p;
            s4 += T(2) * sign * p;
            if (std::abs(p) <= eps * (std::abs(s3) + T(1e-300))) {
                break;
            }
            p *= r;
            r *= q2;
            sign = -sign;
        }
        tc.t3 = s3;
        tc.t4 = s4;
    }
    return tc;
}

} // namespace detail

/// Tuning knobs for period computation and function evaluation.
template <typename T>
struct elliptic_options {
    /// Target for |g2(lattice) - g2| + |g3(lattice) - g3| relative to the input scale.
    T precision_target = T(1e-12);
    /// |Delta| below this times max(1, |g2|^3, |g3|^2) raises degenerate_curve.
    T degeneracy_threshold = T(1e-12);
    /// Distance to a lattice point below this times min(|omega1|, |omega2|)
    /// raises pole_at_lattice_point.
    T pole_threshold_factor = T(1e-6);
};

/// Computes an oriented, fundamental-domain-reduced period matrix whose
/// lattice reproduces the given invariants.
///
/// Candidate generator pairs come from the AGM relations
///   omega = pi / M(sqrt(e_i - e_k), sqrt(e_i - e_j)),
///   omega' = i*pi / M(sqrt(e_i - e_k), sqrt(e_j - e_k)),
/// taken over all root orderings and square-root branches. Each candidate is
/// reduced and then verified against the Eisenstein series of its own lattice;
/// the verified basis with arg(omega1) closest to zero wins. Quasi-periods:
/// eta1 = -pi^2 theta_1'''(0) / (3 omega1 theta_1'(0)), eta2 via Legendre.
template <typename T>
period_matrix<T> compute_periods(const curve_invariants<T> &inv,
                                 const elliptic_options<T> &opt = {}) {
    const T pi = std::numbers::pi_v<T>;
    const T ag2 = std::abs(inv.g2), ag3 = std::abs(inv.g3);
    const T delta_scale = std::max({T(1), ag2 * ag2 * ag2, ag3 * ag3});
    if (std::abs(inv.discriminant()) <= opt.degeneracy_threshold * delta_scale) {
        throw degenerate_curve("discriminant g2^3 - 27*g3^2 is numerically zero");
    }
    const T inv_scale = std::max({T(1), ag2, ag3});
    const auto roots = detail::weierstrass_cubic_roots(inv.g2, inv.g3);

    struct candidate {
        T res;
        cplx<T> w1, w2;
    };
    std::vector<candidate> cands;
    T best = std::numeric_limits<T>::infinity();

    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto &perm : perms) {
        const cplx<T> ei = roots[perm[0]], ej = roots[perm[1]], ek = roots[perm[2]];
        const cplx<T> a = std::sqrt(ei - ek);
        for (int s1 : {1, -1}) {
            const cplx<T> b = T(s1) * std::sqrt(ei - ej);
            for (int s2 : {1, -1}) {
                const cplx<T> c = T(s2) * std::sqrt(ej - ek);
                const cplx<T> m1 = detail::agm_optimal(a, b);
                const cplx<T> m2 = detail::agm_optimal(a, c);
                if (!detail::is_finite(m1) || !detail::is_finite(m2) ||
                    std::abs(m1) == T(0) || std::abs(m2) == T(0)) {
                    continue;
                }
                cplx<T> w1 = pi / m1;
                cplx<T> w2 = cplx<T>(0, pi) / m2;
                const cplx<T> ratio = w2 / w1;
                if (!detail::is_finite(ratio) ||
                    std::abs(ratio.imag()) < T(1e-9) * std::abs(ratio)) {
                    continue;
                }
                if (!detail::reduce_basis(w1, w2)) {
                    continue;
                }
                detail::canonicalize_sign(w1, w2);
                const auto [G2, G3] = detail::eisenstein_invariants(w2 / w1, w1);
                if (!detail::is_finite(G2) || !detail::is_finite(G3)) {
                    continue;
                }
                const T res = std::abs(G2 - inv.g2) + std::abs(G3 - inv.g3);
                cands.push_back({res, w1, w2});
                best = std::min(best, res);
            }
        }
    }
    if (cands.empty() || best > opt.precision_target * inv_scale) {
        throw no_convergence("period computation did not reach the precision target");
    }
    // All verified candidates describe the same lattice; pick the basis whose
    // first generator is closest to the positive real axis (deterministic, and
    // it makes omega1 the real period for real rectangular lattices).
    const candidate *pick = nullptr;
    const T admit = std::max(best * T(16), opt.precision_target * inv_scale);
    for (const auto &c : cands) {
        if (c.res > admit) {
            continue;
        }
        if (!pick) {
            pick = &c;
            continue;
        }
        const T ac = std::abs(std::arg(c.w1)), ap = std::abs(std::arg(pick->w1));
        if (ac < ap - T(1e-12)) {
            pick = &c;
        } else if (std::abs(ac - ap) <= T(1e-12) &&
                   std::arg(c.w1) > std::arg(pick->w1) + T(1e-12)) {
            pick = &c;
        }
    }
    period_matrix<T> pm;
    pm.omega1 = pick->w1;
    pm.omega2 = pick->w2;
    const cplx<T> q = std::exp(cplx<T>(0, pi) * pm.tau());
    const auto tc = detail::theta_constants_at(q);
    pm.eta1 = -pi * pi * tc.t1d3 / (T(3) * pm.omega1 * tc.t1d);
    pm.eta2 = (pm.eta1 * pm.omega2 - cplx<T>(0, 2 * pi)) / pm.omega1;
    return pm;
}

/// Evaluator for the Weierstrass functions of one curve. Construction does all
/// the series setup; evaluation reduces the argument to the centered cell and
/// sums Jacobi theta series there. Immutable after construction and safe for
/// concurrent use.
template <typename T>
class weierstrass_curve {
  public:
    using real_type = T;
    using complex_type = cplx<T>;

    /// Compute periods from the invariants.
    explicit weierstrass_curve(const curve_invariants<T> &inv, elliptic_options<T> opt = {})
        : inv_(inv), opt_(opt), pm_(compute_periods(inv, opt)) {
        setup();
    }

    /// Adopt an existing oriented basis (Im tau > 0) for these invariants.
    /// Verifies that the lattice of the basis reproduces the invariants.
    weierstrass_curve(const curve_invariants<T> &inv, const period_matrix<T> &pm,
                      elliptic_options<T> opt = {})
        : inv_(inv), opt_(opt), pm_(pm) {
        if (std::imag(pm_.tau()) <= T(0)) {
            throw error("period basis is not oriented: Im(omega2/omega1) <= 0");
        }
        const auto [G2, G3] = detail::eisenstein_invariants(pm_.tau(), pm_.omega1);
        const T scale = std::max({T(1), std::abs(inv.g2), std::abs(inv.g3)});
        if (std::abs(G2 - inv.g2) + std::abs(G3 - inv.g3) > T(1e4) * opt.precision_target * scale) {
            throw error("period basis does not reproduce the invariants");
        }
        setup();
    }

    const curve_invariants<T> &invariants() const { return inv_; }
    const period_matrix<T> &periods() const { return pm_; }
    const elliptic_options<T> &options() const { return opt_; }

    /// min(|omega1|, |omega2|); the natural length scale of the lattice.
    T lattice_scale() const { return std::min(std::abs(pm_.omega1), std::abs(pm_.omega2)); }

    T pole_threshold() const { return opt_.pole_threshold_factor * lattice_scale(); }

    /// e1 = wp(omega1/2), from theta constants.
    cplx<T> e1() const { return e1_; }

    /// Real coefficients (s, t) with z = s*omega1 + t*omega2.
    std::array<T, 2> real_coords(const cplx<T> &z) const {
        const T d = pm_.omega1.real() * pm_.omega2.imag() - pm_.omega2.real() * pm_.omega1.imag();
        return {(z.real() * pm_.omega2.imag() - z.imag() * pm_.omega2.real()) / d,
                (z.imag() * pm_.omega1.real() - z.real() * pm_.omega1.imag()) / d};
    }

    struct reduction {
        cplx<T> z0;
        long long m, n; // z = z0 + m*omega1 + n*omega2
    };

    /// z0 has basis coefficients in [0, 1).
    reduction reduce_mod_lattice(const cplx<T> &z) const {
        const auto st = real_coords(z);
        const long long m = static_cast<long long>(std::floor(st[0]));
        const long long n = static_cast<long long>(std::floor(st[1]));
        return {z - T(m) * pm_.omega1 - T(n) * pm_.omega2, m, n};
    }

    /// z0 has basis coefficients in [-1/2, 1/2).
    reduction reduce_centered(const cplx<T> &z) const {
        const auto st = real_coords(z);
        const long long m = static_cast<long long>(std::floor(st[0] + T(1) / T(2)));
        const long long n = static_cast<long long>(std::floor(st[1] + T(1) / T(2)));
        return {z - T(m) * pm_.omega1 - T(n) * pm_.omega2, m, n};
    }

    /// Euclidean distance from z to the nearest lattice point.
    T lattice_distance(const cplx<T> &z) const {
        const auto red = reduce_centered(z);
        T d = std::abs(red.z0);
        for (int dm = -1; dm <= 1; ++dm) {
            for (int dn = -1; dn <= 1; ++dn) {
                d = std::min(d, std::abs(red.z0 - T(dm) * pm_.omega1 - T(dn) * pm_.omega2));
            }
        }
        return d;
    }

    bool on_lattice(const cplx<T> &z) const { return lattice_distance(z) < pole_threshold(); }

    cplx<T> wp(const cplx<T> &z) const {
        const auto red = checked_reduce(z);
        const auto th = detail::theta_at(arg_of(red.z0), q_);
        const cplx<T> r = th.t2 / th.t1;
        return e1_ + pfac_ * r * r;
    }

    cplx<T> wp_prime(const cplx<T> &z) const {
        const auto red = checked_reduce(z);
        const auto th = detail::theta_at(arg_of(red.z0), q_);
        const cplx<T> r = th.t2 / th.t1;
        const cplx<T> dr = (th.t2d * th.t1 - th.t2 * th.t1d) / (th.t1 * th.t1);
        return T(2) * pfac_ * r * dr * (std::numbers::pi_v<T> / pm_.omega1);
    }

    cplx<T> zeta(const cplx<T> &z) const {
        const auto red = checked_reduce(z);
        const auto th = detail::theta_at(arg_of(red.z0), q_);
        return pm_.eta1 / pm_.omega1 * red.z0 +
               (std::numbers::pi_v<T> / pm_.omega1) * th.t1d / th.t1 +
               T(red.m) * pm_.eta1 + T(red.n) * pm_.eta2;
    }

  private:
    void setup() {
        const T pi = std::numbers::pi_v<T>;
        q_ = std::exp(cplx<T>(0, pi) * pm_.tau());
        const auto tc = detail::theta_constants_at(q_);
        const cplx<T> t2_2 = tc.t2 * tc.t2, t4_2 = tc.t4 * tc.t4;
        const cplx<T> piw = pi / pm_.omega1;
        e1_ = piw * piw * (t2_2 * t2_2 + T(2) * t4_2 * t4_2) / T(3);
        const cplx<T> f = piw * tc.t3 * tc.t4;
        pfac_ = f * f;
    }

    reduction checked_reduce(const cplx<T> &z) const {
        const auto red = reduce_centered(z);
        T d = std::abs(red.z0);
        for (int dm = -1; dm <= 1 && d >= pole_threshold(); ++dm) {
            for (int dn = -1; dn <= 1; ++dn) {
                d = std::min(d, std::abs(red.z0 - T(dm) * pm_.omega1 - T(dn) * pm_.omega2));
            }
        }
        if (d < pole_threshold()) {
            throw pole_at_lattice_point("argument within pole threshold of a lattice point");
        }
        return red;
    }

    cplx<T> arg_of(const cplx<T> &z0) const { return std::numbers::pi_v<T> * z0 / pm_.omega1; }

    curve_invariants<T> inv_;
    elliptic_options<T> opt_;
    period_matrix<T> pm_;
    cplx<T> q_;
    cplx<T> e1_;
    cplx<T> pfac_; // (pi * theta_3(0) * theta_4(0) / omega1)^2
};

} // namespace uve
