#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "elliptic.hpp"
#include "errors.hpp"
#include "report.hpp"

namespace uve {

/// Batch-run configuration: curves, variety source, solver knobs, output.
/// Assembled from a config file and/or command-line flags (flags win).
struct run_config {
    std::vector<curve_invariants<double>> curves;
    std::string variety_path;
    int resolution = 64;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    int height = 3;
    long long qmax = 100;
    int workers = 1;
    std::string out_path;

    void validate() const {
        if (curves.empty()) {
            throw invalid_config("at least one --curve is required");
        }
        if (resolution < 8) {
            throw invalid_config("resolution must be at least 8");
        }
        if (!(tol > 0.0) || tol > 1e-4) {
            throw invalid_config("tol must lie in (0, 1e-4]");
        }
        if (height < 1 || qmax < 1 || workers < 1) {
            throw invalid_config("height, qmax and workers must be positive");
        }
    }
};

/// Parses a "g2,g3" pair of complex literals.
inline curve_invariants<double> parse_curve_spec(const std::string &text) {
    const std::size_t comma = text.find(',');
    if (comma == std::string::npos) {
        throw invalid_config("curve spec needs two comma-separated complex numbers: " + text);
    }
    return {parse_complex(text.substr(0, comma)), parse_complex(text.substr(comma + 1))};
}

/// Key-value config file with [sections] and '#' comments. Recognized keys:
/// [curves] curve; [solver] resolution, tol, seed, height, qmax, workers;
/// [files] variety, out.
inline run_config load_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw invalid_config("cannot open config file: " + path);
    }
    run_config cfg;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw invalid_config("malformed config line " + std::to_string(lineno) + ": " + line);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (section == "curves" && key == "curve") {
                cfg.curves.push_back(parse_curve_spec(val));
            } else if (section == "solver" && key == "resolution") {
                cfg.resolution = std::stoi(val);
            } else if (section == "solver" && key == "tol") {
                cfg.tol = std::stod(val);
            } else if (section == "solver" && key == "seed") {
                cfg.seed = std::stoull(val);
            } else if (section == "solver" && key == "height") {
                cfg.height = std::stoi(val);
            } else if (section == "solver" && key == "qmax") {
                cfg.qmax = std::stoll(val);
            } else if (section == "solver" && key == "workers") {
                cfg.workers = std::stoi(val);
            } else if (section == "files" && key == "variety") {
                cfg.variety_path = val;
            } else if (section == "files" && key == "out") {
                cfg.out_path = val;
            } else {
                throw invalid_config("unknown config key '" + key + "' in section [" + section +
                                     "]");
            }
        } catch (const std::invalid_argument &) {
            throw invalid_config("malformed value on config line " + std::to_string(lineno));
        } catch (const std::out_of_range &) {
            throw invalid_config("value out of range on config line " + std::to_string(lineno));
        }
    }
    return cfg;
}

inline std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw invalid_config("cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace uve
