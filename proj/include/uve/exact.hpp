#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "elliptic.hpp"
#include "errors.hpp"

namespace uve {

using bigint = boost::multiprecision::cpp_int;
using bigrat = boost::multiprecision::cpp_rational;

/// Element a + b*sqrt(d) of an imaginary quadratic field Q(sqrt(d)),
/// d a negative integer (never a square, so the representation is unique).
struct quad_elem {
    bigrat a;
    bigrat b;
    long long d = -1;

    quad_elem() = default;
    quad_elem(bigrat a_, bigrat b_, long long d_) : a(std::move(a_)), b(std::move(b_)), d(d_) {
        if (d >= 0) {
            throw precondition_violated("field parameter d must be a negative integer");
        }
    }

    bool is_zero() const { return a == 0 && b == 0; }
    quad_elem conj() const { return {a, -b, d}; }

    friend quad_elem operator+(const quad_elem &x, const quad_elem &y) {
        check(x, y);
        return {x.a + y.a, x.b + y.b, x.d};
    }
    friend quad_elem operator-(const quad_elem &x, const quad_elem &y) {
        check(x, y);
        return {x.a - y.a, x.b - y.b, x.d};
    }
    friend quad_elem operator*(const quad_elem &x, const quad_elem &y) {
        check(x, y);
        return {x.a * y.a + bigrat(x.d) * x.b * y.b, x.a * y.b + x.b * y.a, x.d};
    }
    quad_elem inverse() const {
        const bigrat n = a * a - bigrat(d) * b * b; // = a^2 + |d| b^2 > 0 unless zero
        if (n == 0) {
            throw precondition_violated("division by zero in Q(sqrt(d))");
        }
        return {a / n, -b / n, d};
    }
    friend quad_elem operator/(const quad_elem &x, const quad_elem &y) {
        return x * y.inverse();
    }
    bool operator==(const quad_elem &o) const { return d == o.d && a == o.a && b == o.b; }

  private:
    static void check(const quad_elem &x, const quad_elem &y) {
        if (x.d != y.d) {
            throw precondition_violated("mixed quadratic fields");
        }
    }
};

/// Dense matrix over exact rationals.
class rat_matrix {
  public:
    rat_matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    static rat_matrix identity(std::size_t n) {
        rat_matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bigrat &at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const bigrat &at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    bool operator==(const rat_matrix &) const = default;

    friend rat_matrix operator*(const rat_matrix &x, const rat_matrix &y) {
        rat_matrix out(x.rows_, y.cols_);
        for (std::size_t i = 0; i < x.rows_; ++i) {
            for (std::size_t k = 0; k < x.cols_; ++k) {
                if (x.at(i, k) == 0) continue;
                for (std::size_t j = 0; j < y.cols_; ++j) {
                    out.at(i, j) += x.at(i, k) * y.at(k, j);
                }
            }
        }
        return out;
    }

    friend rat_matrix operator+(const rat_matrix &x, const rat_matrix &y) {
        rat_matrix out(x.rows_, x.cols_);
        for (std::size_t i = 0; i < x.data_.size(); ++i) out.data_[i] = x.data_[i] + y.data_[i];
        return out;
    }

  private:
    std::size_t rows_, cols_;
    std::vector<bigrat> data_;
};

/// The matrix embedding A(a + b*sqrt(d)) = a*I + b*A_d with
/// A_d = [[0, d], [1, 0]]; an injective ring homomorphism K -> M_2(Q).
inline rat_matrix a_embed(const quad_elem &x) {
    rat_matrix m(2, 2);
    m.at(0, 0) = x.a;
    m.at(0, 1) = x.b * bigrat(x.d);
    m.at(1, 0) = x.b;
    m.at(1, 1) = x.a;
    return m;
}

/// Exact rank over Q by fraction-free (Bareiss) elimination: rows are cleared
/// to integers, then eliminated with full pivoting; every division is exact.
inline int exact_rank(const rat_matrix &m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<std::vector<bigint>> w(rows, std::vector<bigint>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        bigint l = 1;
        for (std::size_t j = 0; j < cols; ++j) {
            l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(m.at(i, j)));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            w[i][j] = boost::multiprecision::numerator(m.at(i, j)) *
                      (l / boost::multiprecision::denominator(m.at(i, j)));
        }
    }
    bigint prev = 1;
    std::size_t k = 0;
    const std::size_t kmax = std::min(rows, cols);
    while (k < kmax) {
        std::size_t pi = rows, pj = cols;
        for (std::size_t j = k; j < cols && pi == rows; ++j) {
            for (std::size_t i = k; i < rows; ++i) {
                if (w[i][j] != 0) {
                    pi = i;
                    pj = j;
                    break;
                }
            }
        }
        if (pi == rows) break;
        std::swap(w[pi], w[k]);
        if (pj != k) {
            for (std::size_t i = 0; i < rows; ++i) std::swap(w[i][pj], w[i][k]);
        }
        for (std::size_t i = k + 1; i < rows; ++i) {
            for (std::size_t j = k + 1; j < cols; ++j) {
                w[i][j] = (w[k][k] * w[i][j] - w[i][k] * w[k][j]) / prev;
            }
            w[i][k] = 0;
        }
        prev = w[k][k];
        ++k;
    }
    return static_cast<int>(k);
}

using quad_matrix = std::vector<std::vector<quad_elem>>;

/// Rank over the field K = Q(sqrt(d)) by ordinary elimination with exact
/// field division.
inline int rank_over_field(quad_matrix m) {
    if (m.empty()) return 0;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t piv = rows;
        for (std::size_t i = rank; i < rows; ++i) {
            if (!m[i][col].is_zero()) {
                piv = i;
                break;
            }
        }
        if (piv == rows) continue;
        std::swap(m[piv], m[rank]);
        const quad_elem inv = m[rank][col].inverse();
        for (std::size_t i = rank + 1; i < rows; ++i) {
            if (m[i][col].is_zero()) continue;
            const quad_elem f = m[i][col] * inv;
            for (std::size_t j = col; j < cols; ++j) {
                m[i][j] = m[i][j] - f * m[rank][j];
            }
        }
        ++rank;
    }
    return static_cast<int>(rank);
}

/// Data of a mixed-block rank instance: M, Mtilde are e x r over K, B is an
/// integer 2x2 matrix with negative determinant.
struct rank_instance {
    std::size_t e = 0, r = 0;
    quad_matrix m;
    quad_matrix mtilde;
    std::array<std::array<long long, 2>, 2> b{};

    long long det_b() const { return b[0][0] * b[1][1] - b[0][1] * b[1][0]; }
};

namespace detail {

inline void place_block(rat_matrix &hat, std::size_t s, std::size_t t, const rat_matrix &blk) {
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            hat.at(2 * s + i, 2 * t + j) = blk.at(i, j);
        }
    }
}

inline rat_matrix int_matrix_2x2(const std::array<std::array<long long, 2>, 2> &b) {
    rat_matrix m(2, 2);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) m.at(i, j) = b[i][j];
    }
    return m;
}

} // namespace detail

/// Blocked 2e x 2r matrix with blocks A(m_st) + A(mtilde_st) * B.
inline rat_matrix hat_matrix_lemma1(const rank_instance &inst) {
    rat_matrix hat(2 * inst.e, 2 * inst.r);
    const rat_matrix bm = detail::int_matrix_2x2(inst.b);
    for (std::size_t s = 0; s < inst.e; ++s) {
        for (std::size_t t = 0; t < inst.r; ++t) {
            detail::place_block(hat, s, t, a_embed(inst.m[s][t]) + a_embed(inst.mtilde[s][t]) * bm);
        }
    }
    return hat;
}

struct rank_check {
    int rank = 0;
    bool holds = false;
};

/// Mixed-block lower bound: with rank_K(M) = r and det(B) < 0 the blocked
/// matrix has rank at least r. Returns the witness rank.
inline rank_check check_lemma1(const rank_instance &inst) {
    if (inst.m.size() != inst.e || inst.mtilde.size() != inst.e) {
        throw precondition_violated("matrix dimensions disagree with e");
    }
    if (inst.det_b() >= 0) {
        throw precondition_violated("B must have negative determinant");
    }
    if (rank_over_field(inst.m) != static_cast<int>(inst.r)) {
        throw precondition_violated("M must have exact rank r over K");
    }
    const int rank = exact_rank(hat_matrix_lemma1(inst));
    return {rank, rank >= static_cast<int>(inst.r)};
}

/// Blocked 2e x 2r matrix with blocks A(m_st).
inline rat_matrix hat_matrix_lemma2(const quad_matrix &m) {
    const std::size_t e = m.size(), r = m.empty() ? 0 : m[0].size();
    rat_matrix hat(2 * e, 2 * r);
    for (std::size_t s = 0; s < e; ++s) {
        for (std::size_t t = 0; t < r; ++t) {
            detail::place_block(hat, s, t, a_embed(m[s][t]));
        }
    }
    return hat;
}

/// Pure-block doubling: with rank_K(M) = r the blocked matrix has rank
/// exactly 2r.
inline rank_check check_lemma2(const quad_matrix &m) {
    const std::size_t r = m.empty() ? 0 : m[0].size();
    if (rank_over_field(m) != static_cast<int>(r)) {
        throw precondition_violated("M must have exact rank r over K");
    }
    const int rank = exact_rank(hat_matrix_lemma2(m));
    return {rank, rank == static_cast<int>(2 * r)};
}

/// Seeded random-instance stress of the two rank statements; violations stay
/// zero on every valid instance or the claims themselves are wrong.
struct lemma_fuzz_report {
    int trials = 0;
    int violations = 0;
    int max_hat_rank = 0;
};

namespace detail {

template <typename Rng>
quad_elem random_quad_elem(Rng &rng, long long d, int height) {
    std::uniform_int_distribution<long long> num(-height, height);
    std::uniform_int_distribution<long long> den(1, height);
    return quad_elem(bigrat(num(rng), den(rng)), bigrat(num(rng), den(rng)), d);
}

template <typename Rng>
quad_matrix random_full_rank_matrix(Rng &rng, std::size_t e, std::size_t r, long long d,
                                    int height) {
    for (;;) {
        quad_matrix m(e, std::vector<quad_elem>(r, quad_elem(0, 0, d)));
        for (auto &row : m) {
            for (auto &x : row) x = random_quad_elem(rng, d, height);
        }
        if (rank_over_field(m) == static_cast<int>(r)) return m;
    }
}

} // namespace detail

inline lemma_fuzz_report fuzz_lemma1(std::uint64_t seed, int trials, std::size_t max_dim = 4,
                                     int height = 10) {
    static constexpr long long ds[5] = {-1, -2, -3, -7, -11};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> rdist(1, max_dim);
    std::uniform_int_distribution<long long> ent(-height, height);
    lemma_fuzz_report rep;
    for (int t = 0; t < trials; ++t) {
        const long long d = ds[t % 5];
        rank_instance inst;
        inst.r = rdist(rng);
        inst.e = std::uniform_int_distribution<std::size_t>(inst.r, max_dim)(rng);
        inst.m = detail::random_full_rank_matrix(rng, inst.e, inst.r, d, height);
        inst.mtilde = quad_matrix(inst.e, std::vector<quad_elem>(inst.r, quad_elem(0, 0, d)));
        for (auto &row : inst.mtilde) {
            for (auto &x : row) x = detail::random_quad_elem(rng, d, height);
        }
        do {
            inst.b = {{{ent(rng), ent(rng)}, {ent(rng), ent(rng)}}};
        } while (inst.det_b() >= 0);
        const auto chk = check_lemma1(inst);
        ++rep.trials;
        if (!chk.holds) ++rep.violations;
        rep.max_hat_rank = std::max(rep.max_hat_rank, chk.rank);
    }
    return rep;
}

inline lemma_fuzz_report fuzz_lemma2(std::uint64_t seed, int trials, std::size_t max_dim = 4,
                                     int height = 10) {
    static constexpr long long ds[5] = {-1, -2, -3, -7, -11};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> rdist(1, max_dim);
    lemma_fuzz_report rep;
    for (int t = 0; t < trials; ++t) {
        const long long d = ds[t % 5];
        const std::size_t r = rdist(rng);
        const std::size_t e = std::uniform_int_distribution<std::size_t>(r, max_dim)(rng);
        const auto m = detail::random_full_rank_matrix(rng, e, r, d, height);
        const auto chk = check_lemma2(m);
        ++rep.trials;
        if (!chk.holds) ++rep.violations;
        rep.max_hat_rank = std::max(rep.max_hat_rank, chk.rank);
    }
    return rep;
}

/// Best rational approximation p/q of x with q <= max_den, from the continued
/// fraction convergents (final semiconvergent included).
template <typename T>
std::optional<std::pair<long long, long long>> best_rational(T x, long long max_den) {
    if (!std::isfinite(x)) return std::nullopt;
    long long h0 = 1, k0 = 0, h1 = 0, k1 = 1; // h/k: previous two convergents
    T v = x;
    for (int it = 0; it < 64; ++it) {
        const T fa = std::floor(v);
        if (std::abs(fa) > T(4e18)) break;
        const long long a = static_cast<long long>(fa);
        if (k0 != 0 && a > (4000000000000000000LL - k1) / k0) break;
        const long long h2 = a * h0 + h1, k2 = a * k0 + k1;
        if (k2 > max_den) {
            // last admissible semiconvergent
            const long long t = k0 ? (max_den - k1) / k0 : 0;
            if (t > 0) {
                const long long hs = t * h0 + h1, ks = t * k0 + k1;
                if (std::abs(x - T(hs) / T(ks)) < std::abs(x - T(h0) / T(std::max<long long>(k0, 1)))) {
                    return std::make_pair(hs, ks);
                }
            }
            break;
        }
        h1 = h0;
        k1 = k0;
        h0 = h2;
        k0 = k2;
        const T frac = v - fa;
        if (frac <= std::numeric_limits<T>::epsilon() * std::abs(v)) break;
        v = T(1) / frac;
    }
    if (k0 == 0) return std::nullopt;
    return std::make_pair(h0, k0);
}

/// Solution of L(alpha) P = P A for an endomorphism candidate alpha:
/// L = [[alpha, 0], [gamma, conj(alpha)]] with gamma solved, A snapped to
/// rationals with denominator <= denom_bound.
template <typename T>
struct endo_solution {
    cplx<T> gamma;
    std::array<std::array<bigrat, 2>, 2> a;
    T residual = 0; // scaled residual of the full relation with the snapped A
};

namespace detail {

/// Real (x, y) with x*u + y*v = rhs, for R-independent u, v.
template <typename T>
std::array<T, 2> solve_real_pair(const cplx<T> &u, const cplx<T> &v, const cplx<T> &rhs) {
    const T det = u.real() * v.imag() - v.real() * u.imag();
    return {(rhs.real() * v.imag() - rhs.imag() * v.real()) / det,
            (rhs.imag() * u.real() - rhs.real() * u.imag()) / det};
}

template <typename T>
T period_scale(const period_matrix<T> &pm) {
    return std::max({T(1), std::abs(pm.omega1), std::abs(pm.omega2), std::abs(pm.eta1),
                     std::abs(pm.eta2)});
}

} // namespace detail

/// Attempts to realize alpha as an endomorphism of the lattice of pm:
/// solves L(alpha) P = P A in least squares, snaps A to rationals with
/// denominator <= denom_bound, and demands both the snapped-relation residual
/// < tol and the exact minimal-polynomial identity
/// A^2 - 2 Re(alpha) A + |alpha|^2 I = 0 (coefficcients snapped alongside).
/// Returns nothing when alpha is not an endomorphism at this precision.
template <typename T>
std::optional<endo_solution<T>> solve_endomorphism(const period_matrix<T> &pm,
                                                   const cplx<T> &alpha,
                                                   long long denom_bound, T tol) {
    const cplx<T> w1 = pm.omega1, w2 = pm.omega2, h1 = pm.eta1, h2 = pm.eta2;
    const auto ac = detail::solve_real_pair(w1, w2, alpha * w1);
    const auto bd = detail::solve_real_pair(w1, w2, alpha * w2);
    // snap (a, c, b, d) -> rationals
    std::array<T, 4> raw{ac[0], bd[0], ac[1], bd[1]}; // row-major a, b, c, d
    std::array<std::array<bigrat, 2>, 2> snapped;
    std::array<T, 4> numeric;
    for (int i = 0; i < 4; ++i) {
        const auto pq = best_rational(raw[i], denom_bound);
        if (!pq) return std::nullopt;
        const T val = T(pq->first) / T(pq->second);
        if (std::abs(val - raw[i]) > tol) return std::nullopt;
        snapped[i / 2][i % 2] = bigrat(pq->first, pq->second);
        numeric[i] = val;
    }
    // minimal polynomial of alpha with snapped coefficients
    const auto tr = best_rational(T(2) * alpha.real(), denom_bound);
    const auto nm = best_rational(std::norm(alpha), denom_bound);
    if (!tr || !nm) return std::nullopt;
    if (std::abs(T(tr->first) / T(tr->second) - T(2) * alpha.real()) > tol ||
        std::abs(T(nm->first) / T(nm->second) - std::norm(alpha)) > tol) {
        return std::nullopt;
    }
    rat_matrix am(2, 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) am.at(i, j) = snapped[i][j];
    }
    rat_matrix minpoly = am * am;
    const bigrat t(tr->first, tr->second), n(nm->first, nm->second);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            minpoly.at(i, j) -= t * am.at(i, j);
            if (i == j) minpoly.at(i, j) += n;
        }
    }
    if (!(minpoly == rat_matrix(2, 2))) return std::nullopt;
    // gamma from the (2,1) entry, residual from the full snapped relation
    const T a = numeric[0], b = numeric[1], c = numeric[2], d = numeric[3];
    const cplx<T> alpha_bar = std::conj(alpha);
    const cplx<T> gamma = (alpha_bar * h1 - a * h1 - c * h2) / w1;
    const T scale = detail::period_scale(pm) * std::max(T(1), std::abs(alpha));
    T res = 0;
    res = std::max(res, std::abs(alpha * w1 - (a * w1 + c * w2)));
    res = std::max(res, std::abs(alpha * w2 - (b * w1 + d * w2)));
    res = std::max(res, std::abs(gamma * w1 - alpha_bar * h1 + a * h1 + c * h2));
    res = std::max(res, std::abs(gamma * w2 - alpha_bar * h2 + b * h1 + d * h2));
    res /= scale;
    if (res > tol) return std::nullopt;
    return endo_solution<T>{gamma, snapped, res};
}

template <typename T>
struct isogeny_solution {
    cplx<T> gamma;
    std::array<std::array<long long, 2>, 2> b{};
    T residual = 0;

    long long det_b() const { return b[0][0] * b[1][1] - b[0][1] * b[1][0]; }
};

/// Attempts to realize alpha as an isogeny tangent action from the curve of
/// pm_source to the curve of pm_target: solves
/// L(alpha) P_source = P_target B for an integer matrix B.
template <typename T>
std::optional<isogeny_solution<T>> solve_isogeny_b(const period_matrix<T> &pm_source,
                                                   const period_matrix<T> &pm_target,
                                                   const cplx<T> &alpha, T tol) {
    const cplx<T> w1s = pm_source.omega1, w2s = pm_source.omega2;
    const cplx<T> h1s = pm_source.eta1, h2s = pm_source.eta2;
    const cplx<T> w1t = pm_target.omega1, w2t = pm_target.omega2;
    const cplx<T> h1t = pm_target.eta1, h2t = pm_target.eta2;
    const auto col1 = detail::solve_real_pair(w1t, w2t, alpha * w1s);
    const auto col2 = detail::solve_real_pair(w1t, w2t, alpha * w2s);
    const std::array<T, 4> raw{col1[0], col2[0], col1[1], col2[1]}; // b11 b12 b21 b22
    isogeny_solution<T> sol;
    for (int i = 0; i < 4; ++i) {
        const T r = std::round(raw[i]);
        if (std::abs(r - raw[i]) > tol || std::abs(r) > T(1e15)) return std::nullopt;
        sol.b[i / 2][i % 2] = static_cast<long long>(r);
    }
    const T b11 = T(sol.b[0][0]), b12 = T(sol.b[0][1]), b21 = T(sol.b[1][0]),
            b22 = T(sol.b[1][1]);
    const cplx<T> alpha_bar = std::conj(alpha);
    sol.gamma = (alpha_bar * h1s - b11 * h1t - b21 * h2t) / w1s;
    const T scale = std::max(detail::period_scale(pm_source), detail::period_scale(pm_target)) *
                    std::max(T(1), std::abs(alpha));
    T res = 0;
    res = std::max(res, std::abs(alpha * w1s - (b11 * w1t + b21 * w2t)));
    res = std::max(res, std::abs(alpha * w2s - (b12 * w1t + b22 * w2t)));
    res = std::max(res, std::abs(sol.gamma * w1s - alpha_bar * h1s + b11 * h1t + b21 * h2t));
    res = std::max(res, std::abs(sol.gamma * w2s - alpha_bar * h2s + b12 * h1t + b22 * h2t));
    sol.residual = res / scale;
    if (sol.residual > tol) return std::nullopt;
    return sol;
}

} // namespace uve
