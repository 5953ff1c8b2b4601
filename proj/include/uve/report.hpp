#pragma once

#include <complex>
#include <cstdio>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace uve {

/// Shortest round-trippable decimal form of a double.
inline std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Complex numbers serialize as "re+im i" without spaces: "4+0i", "-1.5-2.25i".
inline std::string format_complex(const std::complex<double> &c) {
    std::string out = format_real(c.real());
    out += c.imag() < 0 ? "-" : "+";
    out += format_real(std::abs(c.imag()));
    out += "i";
    return out;
}

/// Inverse of format_complex; also accepts plain reals and pure-imaginary
/// forms like "2i" or "-i".
inline std::complex<double> parse_complex(std::string_view text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    }
    if (s.empty()) {
        throw invalid_config("empty complex literal");
    }
    const bool has_i = s.back() == 'i' || s.back() == 'I';
    if (has_i) s.pop_back();
    // split at the last top-level sign (not leading, not part of an exponent)
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    auto to_double = [](const std::string &t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception &) {
            throw invalid_config("malformed number in complex literal: " + t);
        }
        if (used != t.size()) {
            throw invalid_config("malformed number in complex literal: " + t);
        }
        return v;
    };
    if (!has_i) {
        if (split != std::string::npos) {
            throw invalid_config("real literal with embedded sign: " + s);
        }
        return {to_double(s), 0.0};
    }
    if (split == std::string::npos) {
        return {0.0, to_double(s)};
    }
    return {to_double(s.substr(0, split)), to_double(s.substr(split))};
}

/// Ordered key-value report with a fixed header; insertion order is the
/// output order, so identical call sequences give byte-identical documents.
class report_writer {
  public:
    explicit report_writer(std::string_view command) {
        buf_ = "# uve report\nschema: 1\ncommand: ";
        buf_ += command;
        buf_ += "\n";
    }

    void section(std::string_view name) {
        buf_ += "\n[";
        buf_ += name;
        buf_ += "]\n";
    }

    void kv(std::string_view key, std::string_view value) {
        buf_ += key;
        buf_ += ": ";
        buf_ += value;
        buf_ += "\n";
    }

    void kv(std::string_view key, const std::string &value) {
        kv(key, std::string_view(value));
    }
    void kv(std::string_view key, const char *value) { kv(key, std::string_view(value)); }
    void kv(std::string_view key, double value) { kv(key, format_real(value)); }
    void kv(std::string_view key, const std::complex<double> &value) {
        kv(key, format_complex(value));
    }
    template <typename Int>
        requires std::is_integral_v<Int>
    void kv(std::string_view key, Int value) {
        kv(key, std::to_string(value));
    }

    const std::string &str() const { return buf_; }

  private:
    std::string buf_;
};

} // namespace uve
