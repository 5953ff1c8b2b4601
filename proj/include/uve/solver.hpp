#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "exact.hpp"
#include "extension.hpp"
#include "variety.hpp"

namespace uve {

/// One located intersection point on the Betti torus.
template <typename T>
struct solution {
    betti_point<T> betti;
    ue_point<T> point;
    T residual{};
    bool refined = false;
    int iterations = 0;
};

/// Integer relation a . x = c (mod 1) satisfied by a set of torus points.
template <typename T>
struct subtorus_relation {
    std::vector<long long> coeffs;
    T offset{};
};

template <typename T>
struct solver_params {
    int resolution = 64;
    T tol = T(1e-8);
    std::uint64_t seed = 0;
    int height_bound = 3;      // sup-norm bound for relation vectors
    long long qmax = 100;      // torsion denominator bound
    int max_iter = 60;
    int workers = 1;
    T spawn_kappa = T(4);      // cell rejection: spawn when value <= kappa * local jump
    T relation_tol = T(1e-6);
    T torsion_tol = T(1e-6);
    T snap_radius = T(0.02);   // rational snapping window, see solve_intersection pass 4
    int dimension_guard = 6;   // maximum 2g accepted
};

template <typename T>
struct intersection_report {
    std::vector<solution<T>> solutions;
    std::vector<std::vector<std::size_t>> clusters; // partition of solution indices
    std::vector<subtorus_relation<T>> relations;
    std::vector<std::optional<long long>> torsion;  // parallel to solutions
    std::vector<int> resolutions_used;
    std::uint64_t grid_cells = 0;
    int newton_failures = 0;
    T grid_min_residual = std::numeric_limits<T>::infinity();
};

namespace detail {

template <typename T>
betti_point<T> betti_from_coords(const std::vector<T> &x) {
    std::vector<std::array<T, 2>> pq(x.size() / 2);
    for (std::size_t k = 0; k < pq.size(); ++k) {
        pq[k] = {x[2 * k], x[2 * k + 1]};
    }
    return betti_point<T>::make(std::move(pq));
}

/// Real residual vector of the system at torus coordinates x: the real and
/// imaginary parts of every scaled polynomial value on the compact point.
template <typename T>
std::vector<T> residual_vector(const extension_config<T> &cfg, const variety_spec<T> &spec,
                               const std::vector<T> &x) {
    const auto pt = betti_to_point(cfg, betti_from_coords(x));
    std::vector<std::array<cplx<T>, 5>> coords(cfg.g());
    for (std::size_t k = 0; k < cfg.g(); ++k) coords[k] = pt.projective(k);
    std::vector<T> out;
    out.reserve(2 * spec.polys.size());
    for (const auto &p : spec.polys) {
        const cplx<T> v = eval_poly<T>(p, coords);
        out.push_back(v.real());
        out.push_back(v.imag());
    }
    return out;
}

template <typename T>
T sup_norm(const std::vector<T> &v) {
    T m{};
    for (const T &x : v) m = std::max(m, std::abs(x));
    return m;
}

template <typename T>
T l2_sq(const std::vector<T> &v) {
    T s{};
    for (const T &x : v) s += x * x;
    return s;
}

/// Dense symmetric solve of (A + ridge I) d = b by Gaussian elimination with
/// partial pivoting; A is tiny (at most 6 x 6).
template <typename T>
bool solve_dense(std::vector<std::vector<T>> a, std::vector<T> b, std::vector<T> &out) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        }
        if (std::abs(a[piv][k]) < std::numeric_limits<T>::min() * T(1e4)) return false;
        std::swap(a[piv], a[k]);
        std::swap(b[piv], b[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const T f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    out.assign(n, T(0));
    for (std::size_t i = n; i-- > 0;) {
        T s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * out[j];
        out[i] = s / a[i][i];
    }
    return true;
}

template <typename T>
struct newton_outcome {
    std::vector<T> x;
    T residual{};
    int iterations = 0;
    bool converged = false;
};

/// Gauss-Newton least squares on the torus coordinates, Jacobian by central
/// finite differences.
template <typename T>
newton_outcome<T> gauss_newton(const extension_config<T> &cfg, const variety_spec<T> &spec,
                               std::vector<T> x, T tol, int max_iter) {
    newton_outcome<T> out;
    const std::size_t dim = x.size();
    const T h = T(1e-6);
    std::vector<T> f = residual_vector(cfg, spec, x);
    T fnorm2 = l2_sq(f);
    int stall = 0;
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it;
        if (sup_norm(f) < tol) {
            out.converged = true;
            break;
        }
        // J columns by central differences
        std::vector<std::vector<T>> jt(dim, std::vector<T>(f.size()));
        for (std::size_t j = 0; j < dim; ++j) {
            auto xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const auto fp = residual_vector(cfg, spec, xp);
            const auto fm = residual_vector(cfg, spec, xm);
            for (std::size_t i = 0; i < f.size(); ++i) {
                jt[j][i] = (fp[i] - fm[i]) / (2 * h);
            }
        }
        // normal equations J^T J d = -J^T f
        std::vector<std::vector<T>> a(dim, std::vector<T>(dim));
        std::vector<T> rhs(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                T s{};
                for (std::size_t k = 0; k < f.size(); ++k) s += jt[i][k] * jt[j][k];
                a[i][j] = a[j][i] = s;
            }
            T s{};
            for (std::size_t k = 0; k < f.size(); ++k) s += jt[i][k] * f[k];
            rhs[i] = -s;
            a[i][i] += T(1e-14); // tiny ridge keeps the solve well posed
        }
        std::vector<T> d;
        if (!solve_dense(a, rhs, d)) break;
        // backtracking on the squared residual
        T step = 1;
        bool improved = false;
        for (int bs = 0; bs < 8; ++bs) {
            auto xt = x;
            for (std::size_t j = 0; j < dim; ++j) xt[j] += step * d[j];
            const auto ft = residual_vector(cfg, spec, xt);
            const T fn2 = l2_sq(ft);
            if (fn2 < fnorm2) {
                x = std::move(xt);
                f = ft;
                fnorm2 = fn2;
                improved = true;
                break;
            }
            step /= 2;
        }
        if (!improved) {
            if (++stall >= 2) break;
        } else {
            stall = 0;
        }
    }
    out.residual = sup_norm(f);
    if (!out.converged && out.residual < tol) out.converged = true;
    out.x = std::move(x);
    return out;
}

inline void run_parallel(std::size_t n, int workers, const std::function<void(std::size_t)> &fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto &t : pool) t.join();
}

} // namespace detail

/// Gauss-Newton refinement from a starting Betti point. Throws no_convergence
/// when the residual target is not reached.
template <typename T>
solution<T> refine_newton(const extension_config<T> &cfg, const variety_spec<T> &spec,
                          const betti_point<T> &b0, T tol, int max_iter) {
    std::vector<T> x;
    for (const auto &pq : b0.pq) {
        x.push_back(pq[0]);
        x.push_back(pq[1]);
    }
    auto out = detail::gauss_newton(cfg, spec, std::move(x), tol, max_iter);
    if (!out.converged) {
        throw no_convergence("Gauss-Newton refinement did not reach the tolerance");
    }
    solution<T> sol;
    sol.betti = detail::betti_from_coords(out.x);
    sol.point = betti_to_point(cfg, sol.betti);
    sol.residual = out.residual;
    sol.refined = true;
    sol.iterations = out.iterations;
    return sol;
}

/// Rational-approximation torsion test: every coordinate must be within tol
/// of a rational with denominator <= qmax; the candidate order is the lcm of
/// the denominators and must annihilate the point within order * tol.
template <typename T>
std::optional<long long> detect_torsion(const betti_point<T> &b, long long qmax, T tol) {
    long long order = 1;
    for (const auto &pq : b.pq) {
        for (const T coord : pq) {
            const T x = betti_point<T>::wrap(coord);
            const auto approx = best_rational(x, qmax);
            if (!approx) return std::nullopt;
            const T err = std::abs(x - T(approx->first) / T(approx->second));
            if (err > tol) return std::nullopt;
            const long long q = approx->second;
            const long long g = std::gcd(order, q);
            if (order / g > 2000000000LL / q) return std::nullopt;
            order = order / g * q;
        }
    }
    // verification: order * b must vanish on the torus
    for (const auto &pq : b.pq) {
        for (const T coord : pq) {
            const T y = betti_point<T>::wrap(T(order) * coord);
            if (std::min(y, T(1) - y) > T(order) * tol) return std::nullopt;
        }
    }
    return order;
}

/// Enumerates primitive integer vectors a with sup-norm at most height whose
/// pairing a . x is constant mod 1 across all points, and reduces the hits to
/// a Q-independent generating set (exact rank test).
template <typename T>
std::vector<subtorus_relation<T>> detect_subtorus(const std::vector<betti_point<T>> &points,
                                                  int height, T tol) {
    std::vector<subtorus_relation<T>> out;
    if (points.size() < 2 || height < 1) return out;
    const std::size_t dim = 2 * points[0].g();
    std::vector<std::vector<T>> coords(points.size(), std::vector<T>(dim));
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t k = 0; k < points[i].g(); ++k) {
            coords[i][2 * k] = points[i].pq[k][0];
            coords[i][2 * k + 1] = points[i].pq[k][1];
        }
    }
    auto wrap_center = [](T x) { // to [-1/2, 1/2)
        return x - std::floor(x + T(1) / T(2));
    };
    std::vector<subtorus_relation<T>> hits;
    std::vector<long long> a(dim, -height);
    for (;;) {
        // skip zero, sign-normalize on the first nonzero entry, require gcd 1
        long long g = 0;
        long long first = 0;
        for (long long ai : a) {
            if (first == 0) first = ai;
            g = std::gcd(g, ai < 0 ? -ai : ai);
        }
        if (g == 1 && first > 0) {
            T base{};
            for (std::size_t j = 0; j < dim; ++j) base += T(a[j]) * coords[0][j];
            bool ok = true;
            T mean_dev{};
            for (std::size_t i = 1; i < points.size() && ok; ++i) {
                T s{};
                for (std::size_t j = 0; j < dim; ++j) s += T(a[j]) * coords[i][j];
                const T dev = wrap_center(s - base);
                if (std::abs(dev) > tol) ok = false;
                mean_dev += dev;
            }
            if (ok) {
                T c = betti_point<T>::wrap(base + mean_dev / T(points.size()));
                if (std::min(c, T(1) - c) <= tol) c = 0;
                hits.push_back({a, c});
            }
        }
        // advance odometer
        std::size_t j = 0;
        while (j < dim && a[j] == height) {
            a[j] = -height;
            ++j;
        }
        if (j == dim) break;
        ++a[j];
    }
    std::sort(hits.begin(), hits.end(), [](const auto &x, const auto &y) {
        auto norms = [](const std::vector<long long> &v) {
            long long ninf = 0, n1 = 0;
            for (long long e : v) {
                ninf = std::max(ninf, e < 0 ? -e : e);
                n1 += e < 0 ? -e : e;
            }
            return std::pair{ninf, n1};
        };
        const auto nx = norms(x.coeffs), ny = norms(y.coeffs);
        if (nx != ny) return nx < ny;
        return x.coeffs < y.coeffs;
    });
    // greedy independent subset over Q
    for (const auto &h : hits) {
        rat_matrix m(out.size() + 1, dim);
        for (std::size_t i = 0; i < out.size(); ++i) {
            for (std::size_t j = 0; j < dim; ++j) m.at(i, j) = out[i].coeffs[j];
        }
        for (std::size_t j = 0; j < dim; ++j) m.at(out.size(), j) = h.coeffs[j];
        if (exact_rank(m) == static_cast<int>(out.size() + 1)) {
            out.push_back(h);
        }
        if (out.size() == dim) break;
    }
    return out;
}

/// Grid scan of the Betti torus followed by Gauss-Newton refinement of the
/// promising cells, deduplication, clustering, and structure detection
/// (integer relations and torsion orders). Deterministic for fixed inputs,
/// independent of the worker count.
template <typename T>
intersection_report<T> solve_intersection(const extension_config<T> &cfg,
                                          const variety_spec<T> &spec,
                                          const solver_params<T> &prm) {
    const std::size_t dim = 2 * cfg.g();
    if (static_cast<int>(dim) > prm.dimension_guard) {
        throw dimension_guard("2g exceeds the configured dimension guard");
    }
    if (prm.resolution < 2) {
        throw error("resolution must be at least 2");
    }
    const std::size_t res = static_cast<std::size_t>(prm.resolution);
    std::uint64_t cells = 1;
    for (std::size_t d = 0; d < dim; ++d) {
        if (cells > (std::uint64_t(1) << 26) / res) {
            throw dimension_guard("grid too large: lower the resolution or g");
        }
        cells *= res;
    }
    intersection_report<T> rep;
    rep.resolutions_used.push_back(prm.resolution);
    rep.grid_cells = cells;

    auto cell_coords = [&](std::uint64_t idx) {
        std::vector<T> x(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            x[d] = (T(idx % res) + T(1) / T(2)) / T(res);
            idx /= res;
        }
        return x;
    };

    // pass 1: grid residuals
    std::vector<T> value(cells);
    detail::run_parallel(cells, prm.workers, [&](std::size_t idx) {
        value[idx] = detail::sup_norm(detail::residual_vector(cfg, spec, cell_coords(idx)));
    });
    for (const T v : value) rep.grid_min_residual = std::min(rep.grid_min_residual, v);

    // pass 2: spawn cells whose value is small against the local jump
    std::vector<std::uint64_t> spawn;
    {
        std::vector<std::uint64_t> stride(dim);
        std::uint64_t s = 1;
        for (std::size_t d = 0; d < dim; ++d) {
            stride[d] = s;
            s *= res;
        }
        for (std::uint64_t idx = 0; idx < cells; ++idx) {
            T jump{};
            std::uint64_t rest = idx;
            for (std::size_t d = 0; d < dim; ++d) {
                const std::uint64_t pos = rest % res;
                rest /= res;
                const std::uint64_t wrap = stride[d] * (res - 1);
                const std::uint64_t up = (pos + 1 == res) ? idx - wrap : idx + stride[d];
                const std::uint64_t dn = (pos == 0) ? idx + wrap : idx - stride[d];
                jump = std::max(jump, std::abs(value[idx] - value[up]));
                jump = std::max(jump, std::abs(value[idx] - value[dn]));
            }
            if (value[idx] <= std::max(prm.spawn_kappa * jump, T(10) * prm.tol)) {
                spawn.push_back(idx);
            }
        }
    }

    // pass 3: refinement
    std::vector<detail::newton_outcome<T>> refined(spawn.size());
    detail::run_parallel(spawn.size(), prm.workers, [&](std::size_t i) {
        refined[i] = detail::gauss_newton(cfg, spec, cell_coords(spawn[i]), prm.tol, prm.max_iter);
    });

    // pass 4: rational snapping, then deduplication in canonical order.
    // Non-transverse zeros (the identity, torsion points) leave a wide ball
    // where Newton stops short of the true point. Coordinates are snapped to
    // nearby rationals with denominator <= qmax; the snap is kept only when
    // the snapped point itself meets the residual tolerance.
    auto rational_snap = [&](detail::newton_outcome<T> &o) {
        // coordinate by coordinate: keep a snap only when the point still
        // meets the tolerance with it applied
        for (std::size_t j = 0; j < o.x.size(); ++j) {
            const T w = betti_point<T>::wrap(o.x[j]);
            const auto pq = best_rational(w, prm.qmax);
            if (!pq) continue;
            const T snapped = betti_point<T>::wrap(T(pq->first) / T(pq->second));
            T dist = std::abs(snapped - w);
            dist = std::min(dist, T(1) - dist);
            if (snapped == w || dist >= prm.snap_radius) continue;
            auto trial = o.x;
            trial[j] = snapped;
            const T res = detail::sup_norm(detail::residual_vector(cfg, spec, trial));
            if (res <= prm.tol) {
                o.x = std::move(trial);
                o.residual = res;
            }
        }
    };
    const T dedup_radius = T(10) * prm.tol;
    auto fully_rational = [&](const std::vector<T> &x) {
        for (const T coord : x) {
            const T w = betti_point<T>::wrap(coord);
            const auto pq = best_rational(w, prm.qmax);
            if (!pq || betti_point<T>::wrap(T(pq->first) / T(pq->second)) != w) return false;
        }
        return true;
    };
    // Around a non-transverse zero every point of a whole valley passes the
    // tolerance. The snapped rational representatives are kept first; other
    // candidates inside the snap window of a rational solution are absorbed
    // into it instead of being reported as fake neighbors.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < spawn.size(); ++i) {
        if (!refined[i].converged) {
            ++rep.newton_failures;
            continue;
        }
        rational_snap(refined[i]);
        order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fully_rational(refined[a].x) > fully_rational(refined[b].x);
    });
    std::vector<bool> kept_rational;
    for (const std::size_t i : order) {
        const bool rational = fully_rational(refined[i].x);
        const auto b = detail::betti_from_coords(refined[i].x);
        bool dup = false;
        for (std::size_t s = 0; s < rep.solutions.size() && !dup; ++s) {
            const T dist = torus_distance(b, rep.solutions[s].betti);
            dup = dist < dedup_radius ||
                  (!rational && kept_rational[s] && dist < prm.snap_radius);
        }
        if (dup) continue;
        solution<T> sol;
        sol.betti = b;
        sol.point = betti_to_point(cfg, b);
        sol.residual = refined[i].residual;
        sol.refined = true;
        sol.iterations = refined[i].iterations;
        rep.solutions.push_back(std::move(sol));
        kept_rational.push_back(rational);
    }
    std::sort(rep.solutions.begin(), rep.solutions.end(),
              [](const solution<T> &a, const solution<T> &b) { return a.betti.pq < b.betti.pq; });

    // pass 5: clusters by single linkage at twice the grid spacing
    const T link = T(2) / T(res);
    std::vector<std::size_t> parent(rep.solutions.size());
    std::iota(parent.begin(), parent.end(), std::size_t(0));
    std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
        return parent[v] == v ? v : parent[v] = find(parent[v]);
    };
    for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
        for (std::size_t j = i + 1; j < rep.solutions.size(); ++j) {
            if (torus_distance(rep.solutions[i].betti, rep.solutions[j].betti) < link) {
                parent[find(i)] = find(j);
            }
        }
    }
    std::vector<std::vector<std::size_t>> buckets(rep.solutions.size());
    for (std::size_t i = 0; i < rep.solutions.size(); ++i) buckets[find(i)].push_back(i);
    for (auto &b : buckets) {
        if (!b.empty()) rep.clusters.push_back(std::move(b));
    }

    // pass 6: structure detection
    std::vector<betti_point<T>> pts;
    pts.reserve(rep.solutions.size());
    for (const auto &s : rep.solutions) pts.push_back(s.betti);
    rep.relations = detect_subtorus(pts, prm.height_bound, prm.relation_tol);
    for (const auto &s : rep.solutions) {
        rep.torsion.push_back(detect_torsion(s.betti, prm.qmax, prm.torsion_tol));
    }
    return rep;
}

} // namespace uve
