#pragma once

#include <array>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace uve {

using bigint = boost::multiprecision::cpp_int;

/// Six-entry pfaffian complexity descriptor, kept as an opaque tuple with the
/// arithmetic of the product rule.
struct pfaffian_format {
    std::array<bigint, 6> entries{};

    bool operator==(const pfaffian_format &) const = default;
};

/// Format of the graph of (wp, zeta) on the punctured fundamental cell.
inline pfaffian_format format_graph() {
    return {{9, 9, 1, 6, 144503, 4}};
}

/// Format of the lifted chart set X_G of one factor.
inline pfaffian_format format_xg() {
    return {{9, 9, 3, 12, 144503, 10}};
}

/// Format of a product of gp chart sets. The fifth entry is exponential in gp.
inline pfaffian_format format_product(unsigned gp) {
    if (gp < 1) {
        throw precondition_violated("format_product needs gp >= 1");
    }
    return {{bigint(9) * gp, bigint(9) * gp, 3, bigint(12) * gp,
             boost::multiprecision::pow(bigint(144503), gp), bigint(10) * gp}};
}

/// Exact bound on the number of isolated intersection points:
/// 2^(42 g^2 + 126 g) * g^(30 g) * max(3, delta)^(21 g).
inline bigint n_iso_bound(unsigned g, unsigned delta) {
    if (g < 1 || delta < 1) {
        throw precondition_violated("n_iso_bound needs g >= 1 and delta >= 1");
    }
    bigint out = boost::multiprecision::pow(bigint(2), 42 * g * g + 126 * g);
    out *= boost::multiprecision::pow(bigint(g), 30 * g);
    out *= boost::multiprecision::pow(bigint(std::max(3u, delta)), 21 * g);
    return out;
}

/// Shape report for the component-count bound N <= c1 * delta^c2. The
/// constants c1, c2 are effectively computable from g but not numerically
/// resolved here; the record never fabricates values for them.
struct theorem2_shape_record {
    unsigned g = 1;
    bool c1_resolved = false;
    bool c2_resolved = false;
    std::string bound_form = "N <= c1 * delta^c2";
    std::string exponent_shape = "(c*g)^(c'*g)";

    bool operator==(const theorem2_shape_record &) const = default;

    std::string serialize() const {
        std::string out = "theorem2-shape v1\n";
        out += "g: " + std::to_string(g) + "\n";
        out += "bound: " + bound_form + "\n";
        out += "c1: " + std::string(c1_resolved ? "resolved" : "unresolved") + "\n";
        out += "c2: " + std::string(c2_resolved ? "resolved" : "unresolved") + "\n";
        out += "exponent-shape: " + exponent_shape + "\n";
        return out;
    }

    static theorem2_shape_record parse(const std::string &text) {
        theorem2_shape_record rec;
        std::size_t pos = 0;
        auto next_line = [&]() -> std::string {
            if (pos >= text.size()) return {};
            std::size_t end = text.find('\n', pos);
            if (end == std::string::npos) end = text.size();
            std::string line = text.substr(pos, end - pos);
            pos = end + 1;
            return line;
        };
        if (next_line() != "theorem2-shape v1") {
            throw error("unrecognized theorem2-shape header");
        }
        for (std::string line = next_line(); !line.empty(); line = next_line()) {
            const std::size_t colon = line.find(": ");
            if (colon == std::string::npos) {
                throw error("malformed theorem2-shape line: " + line);
            }
            const std::string key = line.substr(0, colon), val = line.substr(colon + 2);
            if (key == "g") {
                rec.g = static_cast<unsigned>(std::stoul(val));
            } else if (key == "bound") {
                rec.bound_form = val;
            } else if (key == "c1") {
                rec.c1_resolved = (val == "resolved");
            } else if (key == "c2") {
                rec.c2_resolved = (val == "resolved");
            } else if (key == "exponent-shape") {
                rec.exponent_shape = val;
            }
        }
        return rec;
    }
};

inline theorem2_shape_record theorem2_shape(unsigned g) {
    if (g < 1) {
        throw precondition_violated("theorem2_shape needs g >= 1");
    }
    theorem2_shape_record rec;
    rec.g = g;
    return rec;
}

/// Combined exact-bound report for one (g, delta).
struct bound_report {
    unsigned g = 1;
    unsigned delta = 1;
    bigint n_iso;
    theorem2_shape_record shape;
};

inline bound_report make_bound_report(unsigned g, unsigned delta) {
    return {g, delta, n_iso_bound(g, delta), theorem2_shape(g)};
}

} // namespace uve
