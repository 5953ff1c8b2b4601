#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "elliptic.hpp"
#include "errors.hpp"

namespace uve {

/// A factor point on the identity fiber: projectively [0 : 0 : 1 : 0 : v].
template <typename T>
struct fiber_point {
    cplx<T> v{};
};

/// A factor point on the affine chart X0 != 0, normalized to x0 = 1.
template <typename T>
struct affine_point {
    cplx<T> x1{}, x2{}, x3{}, x4{};
};

template <typename T>
using factor_point = std::variant<fiber_point<T>, affine_point<T>>;

/// A point of the product extension, one factor entry per curve.
template <typename T>
struct ue_point {
    std::vector<factor_point<T>> factors;

    std::size_t g() const { return factors.size(); }

    bool is_fiber(std::size_t k) const {
        return std::holds_alternative<fiber_point<T>>(factors[k]);
    }

    /// Representative projective coordinates (X0, ..., X4) of factor k.
    std::array<cplx<T>, 5> projective(std::size_t k) const {
        if (const auto *f = std::get_if<fiber_point<T>>(&factors[k])) {
            return {cplx<T>(0), cplx<T>(0), cplx<T>(1), cplx<T>(0), f->v};
        }
        const auto &a = std::get<affine_point<T>>(factors[k]);
        return {cplx<T>(1), a.x1, a.x2, a.x3, a.x4};
    }
};

/// Tangent-space coordinates (z_k, w_k) per factor.
template <typename T>
struct log_point {
    struct tangent {
        cplx<T> z{}, w{};
    };
    std::vector<tangent> coords;

    std::size_t g() const { return coords.size(); }
};

/// Real Betti parameters (p_k, q_k) per factor, stored in [0, 1).
template <typename T>
struct betti_point {
    std::vector<std::array<T, 2>> pq;

    std::size_t g() const { return pq.size(); }

    static T wrap(T x) {
        T y = x - std::floor(x);
        if (y >= T(1)) y -= T(1); // floor rounding at the seam
        return y;
    }

    static betti_point make(std::vector<std::array<T, 2>> raw) {
        for (auto &c : raw) {
            c[0] = wrap(c[0]);
            c[1] = wrap(c[1]);
        }
        return betti_point{std::move(raw)};
    }
};

/// Distance on the Betti torus [0,1)^{2g}, sup over coordinates of the
/// circular distance.
template <typename T>
T torus_distance(const betti_point<T> &a, const betti_point<T> &b) {
    T d{};
    for (std::size_t k = 0; k < a.pq.size(); ++k) {
        for (int i = 0; i < 2; ++i) {
            T c = std::abs(a.pq[k][i] - b.pq[k][i]);
            c = std::min(c, T(1) - c);
            d = std::max(d, c);
        }
    }
    return d;
}

template <typename T>
struct extension_options {
    T model_tol = T(1e-9);   // relative residual allowed on the model equations
    T compact_tol = T(1e-8); // default |r| threshold for compact membership
};

/// An ordered product of universal extensions of elliptic curves, with the
/// per-factor Weierstrass evaluators. Immutable after construction.
template <typename T>
class extension_config {
  public:
    explicit extension_config(std::vector<weierstrass_curve<T>> factors,
                              extension_options<T> opt = {})
        : factors_(std::move(factors)), opt_(opt) {
        if (factors_.empty()) {
            throw error("extension_config needs at least one factor");
        }
    }

    explicit extension_config(const std::vector<curve_invariants<T>> &invs,
                              extension_options<T> opt = {})
        : opt_(opt) {
        if (invs.empty()) {
            throw error("extension_config needs at least one factor");
        }
        factors_.reserve(invs.size());
        for (const auto &inv : invs) {
            factors_.emplace_back(inv);
        }
    }

    std::size_t g() const { return factors_.size(); }
    const weierstrass_curve<T> &factor(std::size_t k) const { return factors_[k]; }
    const extension_options<T> &options() const { return opt_; }

  private:
    std::vector<weierstrass_curve<T>> factors_;
    extension_options<T> opt_;
};

/// Relative residual of the two model equations for one factor's coordinates.
/// Fiber points satisfy both equations identically.
template <typename T>
T factor_model_residual(const weierstrass_curve<T> &c, const factor_point<T> &fp) {
    if (std::holds_alternative<fiber_point<T>>(fp)) {
        return T(0);
    }
    const auto &a = std::get<affine_point<T>>(fp);
    const cplx<T> g2 = c.invariants().g2, g3 = c.invariants().g3;
    const cplx<T> cubic = (T(4) * a.x1 * a.x1 - g2) * a.x1 - g3;
    const T r1 = std::abs(a.x2 * a.x2 - cubic) /
                 (T(1) + std::abs(a.x2 * a.x2) + std::abs(cubic));
    const cplx<T> cross = a.x2 * a.x3 + T(2) * a.x1 * a.x1;
    const T r2 = std::abs(a.x4 - cross) / (T(1) + std::abs(a.x4) + std::abs(cross));
    return std::max(r1, r2);
}

/// Max relative model residual over all factors.
template <typename T>
T model_residual(const extension_config<T> &cfg, const ue_point<T> &pt) {
    T r{};
    for (std::size_t k = 0; k < cfg.g(); ++k) {
        r = std::max(r, factor_model_residual(cfg.factor(k), pt.factors[k]));
    }
    return r;
}

template <typename T>
void require_on_model(const extension_config<T> &cfg, const ue_point<T> &pt) {
    if (pt.g() != cfg.g()) {
        throw not_on_model("point has the wrong number of factors");
    }
    if (model_residual(cfg, pt) > cfg.options().model_tol * T(100)) {
        throw not_on_model("model equation residual exceeds tolerance");
    }
}

/// Exponential of the product extension. Off-lattice factors land on the
/// affine chart as (1, wp(z), wp'(z), zeta(z)+w, wp'(z)(zeta(z)+w)+2 wp(z)^2);
/// z in the lattice gives the fiber point with v = w + m*eta1 + n*eta2.
/// Invariant under shifting (z_k, w_k) by integer combinations of the period
/// matrix columns (omega_i, -eta_i).
template <typename T>
ue_point<T> exp_ue(const extension_config<T> &cfg, const log_point<T> &x) {
    if (x.g() != cfg.g()) {
        throw error("log point has the wrong number of factors");
    }
    ue_point<T> out;
    out.factors.reserve(cfg.g());
    for (std::size_t k = 0; k < cfg.g(); ++k) {
        const auto &c = cfg.factor(k);
        const cplx<T> z = x.coords[k].z, w = x.coords[k].w;
        if (c.on_lattice(z)) {
            const auto red = c.reduce_centered(z);
            const cplx<T> v =
                w + T(red.m) * c.periods().eta1 + T(red.n) * c.periods().eta2;
            out.factors.emplace_back(fiber_point<T>{v});
            continue;
        }
        const cplx<T> p = c.wp(z);
        const cplx<T> pp = c.wp_prime(z);
        const cplx<T> x3 = c.zeta(z) + w;
        out.factors.emplace_back(affine_point<T>{p, pp, x3, pp * x3 + T(2) * p * p});
    }
    return out;
}

namespace detail {

/// Solves wp(z) = x1 on one curve: grid-seeded Newton, then the sign of z is
/// fixed by matching wp'(z) against x2.
template <typename T>
cplx<T> invert_wp(const weierstrass_curve<T> &c, const cplx<T> &x1, const cplx<T> &x2,
                  T tol) {
    const auto &pm = c.periods();
    std::vector<cplx<T>> seeds;
    // principal-part seed dominates for large |x1|
    if (std::abs(x1) > T(1)) {
        const cplx<T> s = T(1) / std::sqrt(x1);
        seeds.push_back(s);
        seeds.push_back(cplx<T>(0, 1) * s);
    }
    constexpr int grid = 12;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            seeds.push_back((T(i) + T(1) / T(2)) / T(grid) * pm.omega1 +
                            (T(j) + T(1) / T(2)) / T(grid) * pm.omega2);
        }
    }
    std::sort(seeds.begin(), seeds.end(), [&](const cplx<T> &a, const cplx<T> &b) {
        const T ra = std::abs(c.wp(a) - x1), rb = std::abs(c.wp(b) - x1);
        return ra < rb;
    });
    const T target = tol * (T(1) + std::abs(x1));
    const std::size_t tries = std::min<std::size_t>(seeds.size(), 8);
    for (std::size_t s = 0; s < tries; ++s) {
        cplx<T> z = seeds[s];
        for (int it = 0; it < 80; ++it) {
            cplx<T> f, df;
            try {
                f = c.wp(z) - x1;
                df = c.wp_prime(z);
            } catch (const pole_at_lattice_point &) {
                break;
            }
            if (std::abs(f) <= target) {
                // disambiguate the even-function sign via wp'
                const cplx<T> pp = c.wp_prime(z);
                if (std::abs(pp + x2) < std::abs(pp - x2)) {
                    z = -z;
                }
                // near a double zero of wp - x1 (two-torsion), Newton on wp
                // stalls at sqrt(tol); wp' has a simple zero there, so polish
                // on wp'(z) = x2 instead
                const cplx<T> g2 = c.invariants().g2;
                for (int p = 0; p < 4; ++p) {
                    const cplx<T> d = c.wp_prime(z) - x2;
                    const cplx<T> ppp = T(6) * c.wp(z) * c.wp(z) - g2 / T(2);
                    if (std::abs(d) <= tol * (T(1) + std::abs(x2)) ||
                        std::abs(ppp) * c.lattice_scale() < std::abs(d)) {
                        break;
                    }
                    const cplx<T> step = d / ppp;
                    if (std::abs(c.wp(z - step) - x1) > T(4) * target) {
                        break; // polish must not spoil the wp match
                    }
                    z -= step;
                }
                return z;
            }
            if (std::abs(df) == T(0)) {
                break;
            }
            cplx<T> step = f / df;
            // keep iterates inside a couple of cells
            const T cap = T(2) * c.lattice_scale();
            if (std::abs(step) > cap) {
                step *= cap / std::abs(step);
            }
            z -= step;
        }
    }
    throw no_convergence("wp inversion did not converge");
}

} // namespace detail

/// Inverse of exp_ue, with z_k reduced to the fundamental parallelogram.
template <typename T>
log_point<T> log_ue(const extension_config<T> &cfg, const ue_point<T> &pt) {
    require_on_model(cfg, pt);
    log_point<T> out;
    out.coords.reserve(cfg.g());
    for (std::size_t k = 0; k < cfg.g(); ++k) {
        const auto &c = cfg.factor(k);
        if (const auto *f = std::get_if<fiber_point<T>>(&pt.factors[k])) {
            out.coords.push_back({cplx<T>{}, f->v});
            continue;
        }
        const auto &a = std::get<affine_point<T>>(pt.factors[k]);
        cplx<T> z = detail::invert_wp(c, a.x1, a.x2, T(1e-12));
        const cplx<T> ppz = c.wp_prime(z);
        if (std::abs(ppz - a.x2) > T(1e-6) * (T(1) + std::abs(a.x2))) {
            throw not_on_model("x2 is not the derivative value at any wp preimage");
        }
        cplx<T> w = a.x3 - c.zeta(z);
        const auto red = c.reduce_mod_lattice(z);
        z = red.z0;
        w += T(red.m) * c.periods().eta1 + T(red.n) * c.periods().eta2;
        out.coords.push_back({z, w});
    }
    return out;
}

/// The compact-parametrization map: exp at z = p*omega1 + q*omega2,
/// w = -p*eta1 - q*eta2. Its image is the maximal compact subgroup.
template <typename T>
ue_point<T> betti_to_point(const extension_config<T> &cfg, const betti_point<T> &b) {
    if (b.g() != cfg.g()) {
        throw error("betti point has the wrong number of factors");
    }
    log_point<T> x;
    x.coords.reserve(cfg.g());
    for (std::size_t k = 0; k < cfg.g(); ++k) {
        const auto &pm = cfg.factor(k).periods();
        const T p = b.pq[k][0], q = b.pq[k][1];
        x.coords.push_back({p * pm.omega1 + q * pm.omega2, -p * pm.eta1 - q * pm.eta2});
    }
    return exp_ue(cfg, x);
}

template <typename T>
struct betti_split {
    betti_point<T> betti;
    std::vector<cplx<T>> residual; // r_k = w_k + p_k*eta1 + q_k*eta2
};

/// Betti coordinates of a point together with the compact-membership
/// residuals. r_k = 0 exactly on the maximal compact subgroup, and r is
/// independent of the lattice representative of the logarithm.
template <typename T>
betti_split<T> betti_residual(const extension_config<T> &cfg, const ue_point<T> &pt) {
    const log_point<T> x = log_ue(cfg, pt);
    betti_split<T> out;
    std::vector<std::array<T, 2>> pq;
    for (std::size_t k = 0; k < cfg.g(); ++k) {
        const auto &c = cfg.factor(k);
        const auto st = c.real_coords(x.coords[k].z);
        const cplx<T> r =
            x.coords[k].w + st[0] * c.periods().eta1 + st[1] * c.periods().eta2;
        pq.push_back({st[0], st[1]});
        out.residual.push_back(r);
    }
    out.betti = betti_point<T>::make(std::move(pq));
    return out;
}

template <typename T>
bool is_in_compact(const extension_config<T> &cfg, const ue_point<T> &pt, T tol) {
    const auto split = betti_residual(cfg, pt);
    for (const auto &r : split.residual) {
        if (std::abs(r) >= tol) {
            return false;
        }
    }
    return true;
}

template <typename T>
bool is_in_compact(const extension_config<T> &cfg, const ue_point<T> &pt) {
    return is_in_compact(cfg, pt, cfg.options().compact_tol);
}

template <typename T>
ue_point<T> identity_point(const extension_config<T> &cfg) {
    ue_point<T> out;
    out.factors.assign(cfg.g(), fiber_point<T>{cplx<T>{}});
    return out;
}

/// Group law through the exponential: log both points, add tangent vectors,
/// exponentiate.
template <typename T>
ue_point<T> group_add(const extension_config<T> &cfg, const ue_point<T> &p1,
                      const ue_point<T> &p2) {
    const log_point<T> a = log_ue(cfg, p1);
    const log_point<T> b = log_ue(cfg, p2);
    log_point<T> sum;
    sum.coords.reserve(cfg.g());
    for (std::size_t k = 0; k < cfg.g(); ++k) {
        sum.coords.push_back({a.coords[k].z + b.coords[k].z, a.coords[k].w + b.coords[k].w});
    }
    return exp_ue(cfg, sum);
}

template <typename T>
ue_point<T> scalar_mul(const extension_config<T> &cfg, long long n, const ue_point<T> &pt) {
    const log_point<T> x = log_ue(cfg, pt);
    log_point<T> nx;
    nx.coords.reserve(cfg.g());
    for (std::size_t k = 0; k < cfg.g(); ++k) {
        nx.coords.push_back({T(n) * x.coords[k].z, T(n) * x.coords[k].w});
    }
    return exp_ue(cfg, nx);
}

template <typename T>
ue_point<T> group_neg(const extension_config<T> &cfg, const ue_point<T> &pt) {
    return scalar_mul(cfg, -1, pt);
}

/// The conjugate configuration: invariants and period data conjugated
/// entrywise, then the basis is re-oriented and reduced (conjugation flips the
/// orientation of any oriented basis).
template <typename T>
extension_config<T> conjugate_config(const extension_config<T> &cfg) {
    std::vector<weierstrass_curve<T>> factors;
    factors.reserve(cfg.g());
    for (std::size_t k = 0; k < cfg.g(); ++k) {
        const auto &c = cfg.factor(k);
        const curve_invariants<T> inv{std::conj(c.invariants().g2),
                                      std::conj(c.invariants().g3)};
        cplx<T> w1 = std::conj(c.periods().omega1);
        cplx<T> w2 = std::conj(c.periods().omega2);
        cplx<T> e1 = std::conj(c.periods().eta1);
        cplx<T> e2 = std::conj(c.periods().eta2);
        if (!detail::reduce_basis(w1, w2, &e1, &e2)) {
            throw no_convergence("conjugate basis reduction failed");
        }
        detail::canonicalize_sign(w1, w2, &e1, &e2);
        factors.emplace_back(inv, period_matrix<T>{w1, w2, e1, e2}, c.options());
    }
    return extension_config<T>(std::move(factors), cfg.options());
}

template <typename T>
ue_point<T> conjugate_point(const ue_point<T> &pt) {
    ue_point<T> out;
    out.factors.reserve(pt.g());
    for (const auto &fp : pt.factors) {
        if (const auto *f = std::get_if<fiber_point<T>>(&fp)) {
            out.factors.emplace_back(fiber_point<T>{std::conj(f->v)});
        } else {
            const auto &a = std::get<affine_point<T>>(fp);
            out.factors.emplace_back(affine_point<T>{std::conj(a.x1), std::conj(a.x2),
                                                     std::conj(a.x3), std::conj(a.x4)});
        }
    }
    return out;
}

} // namespace uve
