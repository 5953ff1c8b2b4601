#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "extension.hpp"

namespace uve {

/// Reduced rational coefficient carried alongside the floating value, so
/// exact input survives parse -> serialize round trips.
struct exact_ratio {
    long long num = 0;
    long long den = 1;

    static std::optional<exact_ratio> make(long long n, long long d) {
        if (d == 0) return std::nullopt;
        if (d < 0) {
            n = -n;
            d = -d;
        }
        const long long g = std::gcd(n < 0 ? -n : n, d);
        return exact_ratio{g ? n / g : n, g ? d / g : d};
    }

    std::optional<exact_ratio> operator*(const exact_ratio &o) const {
        // reduce crosswise first to delay overflow
        const long long g1 = std::gcd(num < 0 ? -num : num, o.den);
        const long long g2 = std::gcd(o.num < 0 ? -o.num : o.num, den);
        const long long a = num / (g1 ? g1 : 1), b = o.den / (g1 ? g1 : 1);
        const long long c = o.num / (g2 ? g2 : 1), d = den / (g2 ? g2 : 1);
        if (a != 0 && std::abs(a) > (1LL << 62) / std::max(1LL, std::abs(c))) return std::nullopt;
        if (b != 0 && std::abs(b) > (1LL << 62) / std::max(1LL, std::abs(d))) return std::nullopt;
        return make(a * c, d * b);
    }

    std::optional<exact_ratio> operator+(const exact_ratio &o) const {
        if (std::abs(num) > (1LL << 31) || std::abs(o.num) > (1LL << 31) ||
            den > (1LL << 31) || o.den > (1LL << 31)) {
            return std::nullopt;
        }
        return make(num * o.den + o.num * den, den * o.den);
    }

    bool operator==(const exact_ratio &) const = default;
};

/// One multihomogeneous polynomial on P4^g. Terms hold a 5-exponent row per
/// factor; per-factor degrees are uniform across terms.
template <typename T>
struct multiproj_poly {
    struct term {
        std::vector<std::array<std::uint8_t, 5>> expo; // [factor][coordinate]
        cplx<T> coeff{};
        std::optional<exact_ratio> exact;
    };

    std::vector<term> terms;
    std::vector<int> factor_degree;

    std::size_t g() const { return factor_degree.size(); }

    int degree() const {
        int d = 0;
        for (int fd : factor_degree) d = std::max(d, fd);
        return d;
    }
};

/// A polynomial system with its degree of definition.
template <typename T>
struct variety_spec {
    std::vector<multiproj_poly<T>> polys;
    int g = 0;
    int delta = 0; // max per-factor degree over the system
};

namespace detail {

template <typename T>
void sort_and_combine(multiproj_poly<T> &poly) {
    using term_t = typename multiproj_poly<T>::term;
    std::sort(poly.terms.begin(), poly.terms.end(),
              [](const term_t &a, const term_t &b) { return a.expo > b.expo; });
    std::vector<term_t> out;
    for (auto &t : poly.terms) {
        if (!out.empty() && out.back().expo == t.expo) {
            out.back().coeff += t.coeff;
            if (out.back().exact && t.exact) {
                out.back().exact = *out.back().exact + *t.exact;
            } else {
                out.back().exact.reset();
            }
        } else {
            out.push_back(std::move(t));
        }
    }
    std::erase_if(out, [](const term_t &t) {
        return (t.exact && t.exact->num == 0) || (!t.exact && t.coeff == cplx<T>{});
    });
    poly.terms = std::move(out);
}

template <typename T>
void recompute_degrees(multiproj_poly<T> &poly, std::size_t g) {
    poly.factor_degree.assign(g, 0);
    for (const auto &t : poly.terms) {
        for (std::size_t k = 0; k < g; ++k) {
            int d = 0;
            for (int i = 0; i < 5; ++i) d += t.expo[k][i];
            poly.factor_degree[k] = std::max(poly.factor_degree[k], d);
        }
    }
}

template <typename T>
class variety_parser {
  public:
    variety_parser(std::string_view text, int g) : text_(text), g_(g) {}

    variety_spec<T> run() {
        variety_spec<T> spec;
        spec.g = g_;
        std::size_t start = 0;
        line_ = 1;
        while (start <= text_.size()) {
            std::size_t end = text_.find('\n', start);
            if (end == std::string_view::npos) end = text_.size();
            line_text_ = text_.substr(start, end - start);
            const std::size_t hash = line_text_.find('#');
            if (hash != std::string_view::npos) line_text_ = line_text_.substr(0, hash);
            pos_ = 0;
            skip_ws();
            if (pos_ < line_text_.size()) {
                spec.polys.push_back(parse_poly());
            }
            start = end + 1;
            ++line_;
        }
        if (spec.polys.empty()) {
            throw empty_system("variety text contains no polynomials");
        }
        spec.delta = 0;
        for (const auto &p : spec.polys) {
            for (int fd : p.factor_degree) spec.delta = std::max(spec.delta, fd);
        }
        return spec;
    }

  private:
    struct raw_term {
        std::vector<std::array<std::uint8_t, 5>> expo;
        cplx<T> coeff{1, 0};
        std::optional<exact_ratio> exact = exact_ratio{1, 1};
        bool affine_used[64] = {};
    };

    [[noreturn]] void fail(const std::string &msg) const {
        throw syntax_error(msg, line_, pos_ + 1);
    }

    void skip_ws() {
        while (pos_ < line_text_.size() && std::isspace(static_cast<unsigned char>(line_text_[pos_]))) {
            ++pos_;
        }
    }

    char peek() const { return pos_ < line_text_.size() ? line_text_[pos_] : '\0'; }

    multiproj_poly<T> parse_poly() {
        multiproj_poly<T> poly;
        bool affine_factor[64] = {};
        std::vector<raw_term> terms;
        T sign = 1;
        skip_ws();
        if (peek() == '+' || peek() == '-') {
            sign = peek() == '-' ? -1 : 1;
            ++pos_;
        }
        for (;;) {
            raw_term t = parse_term();
            t.coeff *= sign;
            if (t.exact && sign < 0) t.exact = exact_ratio{-t.exact->num, t.exact->den};
            for (int k = 0; k < g_; ++k) affine_factor[k] |= t.affine_used[k];
            terms.push_back(std::move(t));
            skip_ws();
            if (pos_ >= line_text_.size()) break;
            if (peek() == '+' || peek() == '-') {
                sign = peek() == '-' ? -1 : 1;
                ++pos_;
            } else {
                fail("expected '+', '-' or end of line");
            }
        }
        // per-factor degrees; homogenize affine factors with X0, reject
        // inhomogeneous projective input
        for (int k = 0; k < g_; ++k) {
            int dmax = 0;
            for (const auto &t : terms) {
                int d = 0;
                for (int i = 0; i < 5; ++i) d += t.expo[k][i];
                dmax = std::max(dmax, d);
            }
            for (auto &t : terms) {
                int d = 0;
                for (int i = 0; i < 5; ++i) d += t.expo[k][i];
                if (d == dmax) continue;
                if (affine_factor[k]) {
                    t.expo[k][0] = static_cast<std::uint8_t>(t.expo[k][0] + (dmax - d));
                } else {
                    throw inhomogeneous_degree(
                        "projective polynomial is not homogeneous in factor " +
                        std::to_string(k + 1) + " (line " + std::to_string(line_) + ")");
                }
            }
            poly.factor_degree.push_back(dmax);
        }
        for (auto &t : terms) {
            poly.terms.push_back({std::move(t.expo), t.coeff, t.exact});
        }
        sort_and_combine(poly);
        return poly;
    }

    raw_term parse_term() {
        raw_term t;
        t.expo.assign(g_, {});
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c == 'X' || c == 'x') {
                parse_variable(t);
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                parse_coefficient(t);
            } else {
                fail("expected a coefficient or a variable");
            }
            skip_ws();
            if (peek() == '*') {
                ++pos_;
                continue;
            }
            return t;
        }
    }

    void parse_variable(raw_term &t) {
        const bool affine = peek() == 'x';
        ++pos_;
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected coordinate index");
        const int i = peek() - '0';
        ++pos_;
        if (i > 4) fail("coordinate index must be 0..4");
        if (affine && i == 0) fail("affine variables are x1..x4");
        if (peek() != '_') fail("expected '_' after coordinate index");
        ++pos_;
        std::size_t k = 0;
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected factor index");
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            k = k * 10 + static_cast<std::size_t>(peek() - '0');
            ++pos_;
        }
        if (k < 1 || k > static_cast<std::size_t>(g_)) {
            fail("factor index must be 1.." + std::to_string(g_));
        }
        int e = 1;
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            skip_ws();
            if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected exponent");
            e = 0;
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                e = e * 10 + (peek() - '0');
                ++pos_;
            }
            if (e > 200) fail("exponent too large");
        }
        t.expo[k - 1][i] = static_cast<std::uint8_t>(t.expo[k - 1][i] + e);
        if (affine && k <= 64) t.affine_used[k - 1] = true;
    }

    void parse_coefficient(raw_term &t) {
        bool integral = false;
        long long int_value = 0;
        const T a = parse_number(integral, int_value);
        if (peek() == '/') {
            ++pos_;
            bool integral2 = false;
            long long int_value2 = 0;
            if (!std::isdigit(static_cast<unsigned char>(peek())) && peek() != '.') {
                fail("expected denominator");
            }
            const T b = parse_number(integral2, int_value2);
            if (b == T(0)) fail("zero denominator");
            t.coeff *= cplx<T>(a / b);
            if (integral && integral2 && t.exact) {
                auto r = exact_ratio::make(int_value, int_value2);
                t.exact = r ? (*t.exact * *r) : std::nullopt;
            } else {
                t.exact.reset();
            }
            return;
        }
        t.coeff *= cplx<T>(a);
        if (integral && t.exact) {
            t.exact = *t.exact * exact_ratio{int_value, 1};
        } else {
            t.exact.reset();
        }
    }

    T parse_number(bool &integral, long long &int_value) {
        const std::size_t begin = pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        integral = pos_ > begin;
        if (peek() == '.') {
            integral = false;
            ++pos_;
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        if (pos_ == begin) fail("expected a number");
        if (peek() == 'e' || peek() == 'E') {
            integral = false;
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected exponent digits");
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        const std::string token(line_text_.substr(begin, pos_ - begin));
        if (integral) {
            if (token.size() > 18) {
                integral = false;
            } else {
                int_value = std::stoll(token);
            }
        }
        return static_cast<T>(std::stod(token));
    }

    std::string_view text_;
    std::string_view line_text_;
    int g_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

} // namespace detail

/// Parses a variety file: one polynomial per line, '#' comments, variables
/// X{i}_{k} (projective, i = 0..4) or x{i}_{k} (affine, i = 1..4; homogenized
/// with X0_k), '*' for products, '^' for powers, integer / rational / decimal
/// coefficients.
template <typename T>
variety_spec<T> parse_variety(std::string_view text, int g) {
    if (g < 1 || g > 64) {
        throw error("factor count g must be in 1..64");
    }
    return detail::variety_parser<T>(text, g).run();
}

/// Scaled evaluation of one polynomial at explicit projective coordinates:
/// the raw value divided by prod_k (max_i |coords[k][i]|)^deg_k, which makes
/// the result invariant under rescaling any factor's coordinates.
template <typename T>
cplx<T> eval_poly(const multiproj_poly<T> &poly,
                  std::span<const std::array<cplx<T>, 5>> coords) {
    cplx<T> acc{};
    for (const auto &t : poly.terms) {
        cplx<T> v = t.coeff;
        for (std::size_t k = 0; k < poly.g(); ++k) {
            for (int i = 0; i < 5; ++i) {
                for (int e = 0; e < t.expo[k][i]; ++e) v *= coords[k][i];
            }
        }
        acc += v;
    }
    T scale = 1;
    for (std::size_t k = 0; k < poly.g(); ++k) {
        T m = 0;
        for (int i = 0; i < 5; ++i) m = std::max(m, std::abs(coords[k][i]));
        for (int d = 0; d < poly.factor_degree[k]; ++d) scale *= m;
    }
    return scale > T(0) ? acc / scale : acc;
}

/// Scaled residuals of every polynomial of the system at a model point.
template <typename T>
std::vector<cplx<T>> eval_variety(const variety_spec<T> &spec, const extension_config<T> &cfg,
                                  const ue_point<T> &pt) {
    if (spec.g != static_cast<int>(cfg.g())) {
        throw error("variety and configuration disagree on the number of factors");
    }
    require_on_model(cfg, pt);
    std::vector<std::array<cplx<T>, 5>> coords(cfg.g());
    for (std::size_t k = 0; k < cfg.g(); ++k) coords[k] = pt.projective(k);
    std::vector<cplx<T>> out;
    out.reserve(spec.polys.size());
    for (const auto &p : spec.polys) {
        out.push_back(eval_poly<T>(p, coords));
    }
    return out;
}

/// One of the 2^g chart systems: factors in `affine_mask` are specialized to
/// X0 = 1, the others to the identity element [0:0:1:0:0].
template <typename T>
struct chart_system {
    std::uint64_t affine_mask = 0;
    variety_spec<T> system;
};

template <typename T>
std::vector<chart_system<T>> chart_specializations(const variety_spec<T> &spec) {
    const std::size_t g = static_cast<std::size_t>(spec.g);
    std::vector<chart_system<T>> out;
    out.reserve(std::size_t(1) << g);
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << g); ++mask) {
        chart_system<T> cs;
        cs.affine_mask = mask;
        cs.system.g = spec.g;
        for (const auto &poly : spec.polys) {
            multiproj_poly<T> sp;
            for (const auto &t : poly.terms) {
                auto nt = t;
                bool alive = true;
                for (std::size_t k = 0; k < g && alive; ++k) {
                    if (mask >> k & 1) {
                        nt.expo[k][0] = 0; // X0_k = 1
                    } else {
                        // identity element: only X2_k is nonzero (= 1)
                        if (t.expo[k][0] || t.expo[k][1] || t.expo[k][3] || t.expo[k][4]) {
                            alive = false;
                        } else {
                            nt.expo[k][2] = 0;
                        }
                    }
                }
                if (alive) sp.terms.push_back(std::move(nt));
            }
            detail::recompute_degrees(sp, g);
            detail::sort_and_combine(sp);
            if (!sp.terms.empty()) {
                cs.system.polys.push_back(std::move(sp));
            }
        }
        cs.system.delta = 0;
        for (const auto &p : cs.system.polys) {
            for (int fd : p.factor_degree) cs.system.delta = std::max(cs.system.delta, fd);
        }
        out.push_back(std::move(cs));
    }
    return out;
}

namespace detail {

template <typename T>
std::string format_coeff(const cplx<T> &c, const std::optional<exact_ratio> &exact) {
    if (exact) {
        std::string s = std::to_string(exact->num);
        if (exact->den != 1) s += "/" + std::to_string(exact->den);
        return s;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(c.real()));
    return buf;
}

} // namespace detail

/// Canonical text form; parse_variety(serialize_variety(s), s.g) reproduces s.
template <typename T>
std::string serialize_variety(const variety_spec<T> &spec) {
    std::string out;
    for (const auto &poly : spec.polys) {
        bool first = true;
        for (const auto &t : poly.terms) {
            std::string coeff = detail::format_coeff(t.coeff, t.exact);
            bool neg = false;
            if (!coeff.empty() && coeff[0] == '-') {
                neg = true;
                coeff = coeff.substr(1);
            }
            out += first ? (neg ? "-" : "") : (neg ? " - " : " + ");
            first = false;
            std::string vars;
            for (std::size_t k = 0; k < poly.g(); ++k) {
                for (int i = 0; i < 5; ++i) {
                    const int e = t.expo[k][i];
                    if (e == 0) continue;
                    if (!vars.empty()) vars += "*";
                    vars += "X" + std::to_string(i) + "_" + std::to_string(k + 1);
                    if (e > 1) vars += "^" + std::to_string(e);
                }
            }
            if (vars.empty()) {
                out += coeff;
            } else if (coeff == "1") {
                out += vars;
            } else {
                out += coeff + "*" + vars;
            }
        }
        if (first) out += "0";
        out += "\n";
    }
    return out;
}

} // namespace uve
