// Batch front end: thin command adapters over the library. Every command
// writes a deterministic structured-text report to stdout or --out.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <uve/bounds.hpp>
#include <uve/exact.hpp>
#include <uve/extension.hpp>
#include <uve/report.hpp>
#include <uve/runconfig.hpp>
#include <uve/solver.hpp>
#include <uve/variety.hpp>

namespace {

using cd = std::complex<double>;

void emit(const std::string &text, const std::string &out_path) {
    if (out_path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw uve::invalid_config("cannot write output file: " + out_path);
    }
    out << text;
}

uve::extension_config<double> build_config(const std::vector<uve::curve_invariants<double>> &curves) {
    return uve::extension_config<double>(curves);
}

void echo_curves(uve::report_writer &rep, const std::vector<uve::curve_invariants<double>> &curves) {
    rep.kv("g", curves.size());
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const std::string p = "curve." + std::to_string(k + 1);
        rep.kv(p + ".g2", curves[k].g2);
        rep.kv(p + ".g3", curves[k].g3);
    }
}

double parse_fraction(const std::string &text) {
    const std::size_t slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            return std::stod(text);
        }
        const double den = std::stod(text.substr(slash + 1));
        if (den == 0) throw uve::invalid_config("zero denominator: " + text);
        return std::stod(text.substr(0, slash)) / den;
    } catch (const std::invalid_argument &) {
        throw uve::invalid_config("malformed number: " + text);
    }
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t end = s.find(sep, start);
        out.push_back(s.substr(start, end == std::string::npos ? end : end - start));
        if (end == std::string::npos) return out;
        start = end + 1;
    }
}

// "affine:x1;x2;x3;x4" or "fiber:v" -> one factor point
uve::factor_point<double> parse_factor_point(const std::string &text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos) {
        throw uve::invalid_config("point spec needs 'affine:' or 'fiber:' prefix: " + text);
    }
    const std::string kind = text.substr(0, colon), rest = text.substr(colon + 1);
    if (kind == "fiber") {
        return uve::fiber_point<double>{uve::parse_complex(rest)};
    }
    if (kind == "affine") {
        const auto parts = split(rest, ';');
        if (parts.size() != 4) {
            throw uve::invalid_config("affine point needs x1;x2;x3;x4: " + text);
        }
        return uve::affine_point<double>{uve::parse_complex(parts[0]), uve::parse_complex(parts[1]),
                                         uve::parse_complex(parts[2]), uve::parse_complex(parts[3])};
    }
    throw uve::invalid_config("unknown point kind '" + kind + "'");
}

void report_log_point(uve::report_writer &rep, const uve::extension_config<double> &cfg,
                      const uve::ue_point<double> &pt) {
    const auto x = uve::log_ue(cfg, pt);
    const auto split = uve::betti_residual(cfg, pt);
    for (std::size_t k = 0; k < cfg.g(); ++k) {
        const std::string p = "factor." + std::to_string(k + 1);
        rep.kv(p + ".z", x.coords[k].z);
        rep.kv(p + ".w", x.coords[k].w);
        rep.kv(p + ".p", split.betti.pq[k][0]);
        rep.kv(p + ".q", split.betti.pq[k][1]);
        rep.kv(p + ".compact.residual", std::abs(split.residual[k]));
    }
}

int cmd_periods(const std::string &curve_spec, const std::string &out_path) {
    const auto inv = uve::parse_curve_spec(curve_spec);
    uve::report_writer rep("periods");
    rep.section("inputs");
    rep.kv("curve.g2", inv.g2);
    rep.kv("curve.g3", inv.g3);
    const auto pm = uve::compute_periods(inv);
    rep.section("results");
    rep.kv("omega1", pm.omega1);
    rep.kv("omega2", pm.omega2);
    rep.kv("eta1", pm.eta1);
    rep.kv("eta2", pm.eta2);
    rep.kv("tau", pm.tau());
    rep.kv("legendre.residual", std::abs(pm.legendre_residual()));
    const cd delta = inv.discriminant();
    rep.kv("discriminant", delta);
    rep.kv("j.invariant", 1728.0 * inv.g2 * inv.g2 * inv.g2 / delta);
    emit(rep.str(), out_path);
    return 0;
}

int cmd_exp(const std::vector<std::string> &curve_specs, const std::vector<std::string> &zs,
            const std::vector<std::string> &ws, const std::string &out_path) {
    std::vector<uve::curve_invariants<double>> curves;
    for (const auto &c : curve_specs) curves.push_back(uve::parse_curve_spec(c));
    if (zs.size() != curves.size() || ws.size() != curves.size()) {
        throw uve::invalid_config("need one --z and one --w per --curve");
    }
    const auto cfg = build_config(curves);
    uve::log_point<double> x;
    for (std::size_t k = 0; k < curves.size(); ++k) {
        x.coords.push_back({uve::parse_complex(zs[k]), uve::parse_complex(ws[k])});
    }
    uve::report_writer rep("exp");
    rep.section("inputs");
    echo_curves(rep, curves);
    for (std::size_t k = 0; k < curves.size(); ++k) {
        rep.kv("z." + std::to_string(k + 1), x.coords[k].z);
        rep.kv("w." + std::to_string(k + 1), x.coords[k].w);
    }
    const auto pt = uve::exp_ue(cfg, x);
    rep.section("results");
    for (std::size_t k = 0; k < cfg.g(); ++k) {
        const std::string p = "factor." + std::to_string(k + 1);
        rep.kv(p + ".chart", pt.is_fiber(k) ? "fiber" : "affine");
        const auto coords = pt.projective(k);
        for (int i = 0; i < 5; ++i) {
            rep.kv(p + ".X" + std::to_string(i), coords[i]);
        }
    }
    rep.kv("model.residual", uve::model_residual(cfg, pt));
    emit(rep.str(), out_path);
    return 0;
}

int cmd_log_or_betti(const char *name, const std::vector<std::string> &curve_specs,
                     const std::vector<std::string> &points, double tol,
                     const std::string &out_path) {
    std::vector<uve::curve_invariants<double>> curves;
    for (const auto &c : curve_specs) curves.push_back(uve::parse_curve_spec(c));
    if (points.size() != curves.size()) {
        throw uve::invalid_config("need one --point per --curve");
    }
    const auto cfg = build_config(curves);
    uve::ue_point<double> pt;
    for (const auto &p : points) pt.factors.push_back(parse_factor_point(p));
    uve::report_writer rep(name);
    rep.section("inputs");
    echo_curves(rep, curves);
    for (std::size_t k = 0; k < points.size(); ++k) {
        rep.kv("point." + std::to_string(k + 1), points[k]);
    }
    rep.section("results");
    report_log_point(rep, cfg, pt);
    rep.kv("in.compact", uve::is_in_compact(cfg, pt, tol) ? "true" : "false");
    rep.kv("compact.tol", tol);
    emit(rep.str(), out_path);
    return 0;
}

int cmd_bound(unsigned g, unsigned delta, const std::string &out_path) {
    uve::report_writer rep("bound");
    rep.section("inputs");
    rep.kv("g", g);
    rep.kv("delta", delta);
    const auto report = uve::make_bound_report(g, delta);
    rep.section("results");
    rep.kv("n.iso.bound", report.n_iso.str());
    auto fmt = [&](const char *key, const uve::pfaffian_format &f) {
        std::string s;
        for (const auto &e : f.entries) {
            if (!s.empty()) s += ",";
            s += e.str();
        }
        rep.kv(key, s);
    };
    fmt("format.graph", uve::format_graph());
    fmt("format.xg", uve::format_xg());
    fmt("format.product", uve::format_product(g));
    rep.kv("shape.bound", report.shape.bound_form);
    rep.kv("shape.c1", report.shape.c1_resolved ? "resolved" : "unresolved");
    rep.kv("shape.c2", report.shape.c2_resolved ? "resolved" : "unresolved");
    rep.kv("shape.exponent", report.shape.exponent_shape);
    emit(rep.str(), out_path);
    return 0;
}

int cmd_lemmas(int trials, std::uint64_t seed, const std::string &out_path) {
    uve::report_writer rep("lemmas");
    rep.section("inputs");
    rep.kv("trials", trials);
    rep.kv("seed", seed);
    const auto l1 = uve::fuzz_lemma1(seed, trials);
    const auto l2 = uve::fuzz_lemma2(seed + 1, trials);
    rep.section("results");
    rep.kv("lemma1.trials", l1.trials);
    rep.kv("lemma1.violations", l1.violations);
    rep.kv("lemma1.max.rank", l1.max_hat_rank);
    rep.kv("lemma2.trials", l2.trials);
    rep.kv("lemma2.violations", l2.violations);
    rep.kv("lemma2.max.rank", l2.max_hat_rank);
    rep.kv("violations", l1.violations + l2.violations);
    emit(rep.str(), out_path);
    return l1.violations + l2.violations == 0 ? 0 : 2;
}

int cmd_torsion(const std::string &coords_text, long long qmax, double tol,
                const std::string &out_path) {
    const auto parts = split(coords_text, ',');
    if (parts.empty() || parts.size() % 2 != 0) {
        throw uve::invalid_config("betti coordinates come in (p,q) pairs");
    }
    std::vector<std::array<double, 2>> pq(parts.size() / 2);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        pq[i / 2][i % 2] = parse_fraction(parts[i]);
    }
    const auto b = uve::betti_point<double>::make(std::move(pq));
    uve::report_writer rep("torsion");
    rep.section("inputs");
    rep.kv("betti", coords_text);
    rep.kv("qmax", qmax);
    rep.kv("tol", tol);
    rep.section("results");
    const auto order = uve::detect_torsion(b, qmax, tol);
    rep.kv("torsion.order", order ? std::to_string(*order) : "none");
    emit(rep.str(), out_path);
    return 0;
}

int cmd_intersect(const uve::run_config &rc, const std::string &plot_path) {
    rc.validate();
    if (rc.variety_path.empty()) {
        throw uve::invalid_config("--variety FILE is required");
    }
    const auto text = uve::read_text_file(rc.variety_path);
    const auto spec = uve::parse_variety<double>(text, static_cast<int>(rc.curves.size()));
    const auto cfg = build_config(rc.curves);

    uve::solver_params<double> prm;
    prm.resolution = rc.resolution;
    prm.tol = rc.tol;
    prm.seed = rc.seed;
    prm.height_bound = rc.height;
    prm.qmax = rc.qmax;
    prm.workers = rc.workers;
    const auto rep = uve::solve_intersection(cfg, spec, prm);

    uve::report_writer out("intersect");
    out.section("inputs");
    echo_curves(out, rc.curves);
    out.kv("variety.file", rc.variety_path);
    out.kv("variety.delta", spec.delta);
    out.kv("variety.polynomials", spec.polys.size());
    out.kv("resolution", rc.resolution);
    out.kv("tol", rc.tol);
    out.kv("seed", rc.seed);
    out.kv("height", rc.height);
    out.kv("qmax", rc.qmax);

    out.section("results");
    out.kv("solutions", rep.solutions.size());
    for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
        const auto &s = rep.solutions[i];
        const std::string p = "solution." + std::to_string(i + 1);
        std::string betti;
        for (const auto &pq : s.betti.pq) {
            if (!betti.empty()) betti += " ";
            betti += uve::format_real(pq[0]) + " " + uve::format_real(pq[1]);
        }
        out.kv(p + ".betti", betti);
        out.kv(p + ".residual", s.residual);
        out.kv(p + ".iterations", s.iterations);
        out.kv(p + ".torsion", rep.torsion[i] ? std::to_string(*rep.torsion[i]) : "none");
    }
    out.kv("clusters", rep.clusters.size());
    for (std::size_t i = 0; i < rep.clusters.size(); ++i) {
        std::string members;
        for (std::size_t idx : rep.clusters[i]) {
            if (!members.empty()) members += " ";
            members += std::to_string(idx + 1);
        }
        out.kv("cluster." + std::to_string(i + 1), members);
    }
    out.kv("relations", rep.relations.size());
    for (std::size_t i = 0; i < rep.relations.size(); ++i) {
        std::string coeffs;
        for (long long c : rep.relations[i].coeffs) {
            if (!coeffs.empty()) coeffs += " ";
            coeffs += std::to_string(c);
        }
        const std::string p = "relation." + std::to_string(i + 1);
        out.kv(p + ".coeffs", coeffs);
        out.kv(p + ".offset", rep.relations[i].offset);
    }
    out.kv("newton.failures", rep.newton_failures);
    out.kv("grid.cells", rep.grid_cells);
    out.kv("grid.min.residual", rep.grid_min_residual);
    std::string resolutions;
    for (int r : rep.resolutions_used) {
        if (!resolutions.empty()) resolutions += " ";
        resolutions += std::to_string(r);
    }
    out.kv("resolutions.used", resolutions);

    out.section("provenance");
    out.kv("model.tol", cfg.options().model_tol);
    out.kv("compact.tol", cfg.options().compact_tol);
    out.kv("relation.tol", prm.relation_tol);
    out.kv("torsion.tol", prm.torsion_tol);
    out.kv("snap.radius", prm.snap_radius);
    out.kv("spawn.kappa", prm.spawn_kappa);
    out.kv("dedup.radius", 10.0 * prm.tol);
    emit(out.str(), rc.out_path);

    // plot-data table of (betti coordinates, sup residual) grid samples
    if (!plot_path.empty()) {
        const std::size_t dim = 2 * cfg.g();
        std::size_t plot_res = rc.resolution;
        while (plot_res > 8) {
            double total = 1;
            for (std::size_t d2 = 0; d2 < dim; ++d2) total *= double(plot_res);
            if (total <= 65536.0) break;
            plot_res /= 2;
        }
        std::string table = "# uve plot data: betti coordinates then sup residual\n";
        std::vector<std::size_t> idx(dim, 0);
        std::vector<double> x(dim);
        for (;;) {
            for (std::size_t d2 = 0; d2 < dim; ++d2) {
                x[d2] = (double(idx[d2]) + 0.5) / double(plot_res);
            }
            const auto f = uve::detail::residual_vector(cfg, spec, x);
            std::string row;
            for (std::size_t d2 = 0; d2 < dim; ++d2) {
                row += uve::format_real(x[d2]);
                row += " ";
            }
            row += uve::format_real(uve::detail::sup_norm(f));
            table += row + "\n";
            std::size_t d2 = 0;
            while (d2 < dim && ++idx[d2] == plot_res) {
                idx[d2] = 0;
                ++d2;
            }
            if (d2 == dim) break;
        }
        emit(table, plot_path);
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"universal vectorial extensions of elliptic curves: periods, exponentials, "
                 "maximal-compact intersections, rank lemmas, exact bounds"};
    app.require_subcommand(1);
    app.fallthrough(); // --out may appear after the subcommand

    std::string out_path;
    app.add_option("--out", out_path, "write the report to FILE instead of stdout")
        ->capture_default_str();

    // periods
    auto *sc_periods = app.add_subcommand("periods", "period matrix of one curve");
    std::string periods_curve;
    sc_periods->add_option("--curve", periods_curve, "g2,g3 (complex, 're+im i')")->required();

    // exp
    auto *sc_exp = app.add_subcommand("exp", "exponential map at tangent coordinates");
    std::vector<std::string> exp_curves, exp_z, exp_w;
    sc_exp->add_option("--curve", exp_curves, "g2,g3 per factor (repeatable)")->required();
    sc_exp->add_option("--z", exp_z, "z per factor")->required();
    sc_exp->add_option("--w", exp_w, "w per factor")->required();

    // log / betti
    std::vector<std::string> pt_curves, pt_points;
    double pt_tol = 1e-8;
    auto *sc_log = app.add_subcommand("log", "logarithm and Betti coordinates of a point");
    sc_log->add_option("--curve", pt_curves, "g2,g3 per factor (repeatable)")->required();
    sc_log->add_option("--point", pt_points, "'affine:x1;x2;x3;x4' or 'fiber:v' per factor")
        ->required();
    sc_log->add_option("--tol", pt_tol, "compact membership tolerance");
    auto *sc_betti = app.add_subcommand("betti", "Betti coordinates and compact residual");
    sc_betti->add_option("--curve", pt_curves, "g2,g3 per factor (repeatable)")->required();
    sc_betti->add_option("--point", pt_points, "'affine:x1;x2;x3;x4' or 'fiber:v' per factor")
        ->required();
    sc_betti->add_option("--tol", pt_tol, "compact membership tolerance");

    // intersect
    auto *sc_intersect = app.add_subcommand("intersect", "locate V on the maximal compact");
    std::string config_path, plot_path;
    std::vector<std::string> is_curves;
    int is_resolution = 0;
    double is_tol = 0;
    std::uint64_t is_seed = 0;
    int is_height = 0;
    long long is_qmax = 0;
    int is_workers = 0;
    std::string is_variety;
    sc_intersect->add_option("--config", config_path, "config file (flags override)");
    sc_intersect->add_option("--curve", is_curves, "g2,g3 per factor (repeatable)");
    sc_intersect->add_option("--variety", is_variety, "variety file");
    sc_intersect->add_option("--resolution", is_resolution, "grid resolution per axis");
    sc_intersect->add_option("--tol", is_tol, "refinement tolerance");
    sc_intersect->add_option("--seed", is_seed, "deterministic run seed");
    sc_intersect->add_option("--height", is_height, "relation height bound");
    sc_intersect->add_option("--qmax", is_qmax, "torsion denominator bound");
    sc_intersect->add_option("--workers", is_workers, "worker threads");
    sc_intersect->add_option("--plot", plot_path, "plot-data output file");

    // bound
    auto *sc_bound = app.add_subcommand("bound", "exact isolated-point bound");
    unsigned bound_g = 1, bound_delta = 1;
    sc_bound->add_option("g", bound_g, "number of factors")->required();
    sc_bound->add_option("delta", bound_delta, "degree of definition")->required();

    // lemmas
    auto *sc_lemmas = app.add_subcommand("lemmas", "exact rank-lemma fuzzing");
    int lemmas_trials = 1000;
    std::uint64_t lemmas_seed = 7;
    sc_lemmas->add_option("--trials", lemmas_trials, "instances per lemma");
    sc_lemmas->add_option("--seed", lemmas_seed, "rng seed");

    // torsion
    auto *sc_torsion = app.add_subcommand("torsion", "torsion order of a Betti point");
    std::string torsion_coords;
    long long torsion_qmax = 100;
    double torsion_tol = 1e-6;
    sc_torsion->add_option("betti", torsion_coords, "comma-separated p,q per factor")->required();
    sc_torsion->add_option("--qmax", torsion_qmax, "denominator bound");
    sc_torsion->add_option("--tol", torsion_tol, "approximation tolerance");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(sc_periods)) {
            return cmd_periods(periods_curve, out_path);
        }
        if (app.got_subcommand(sc_exp)) {
            return cmd_exp(exp_curves, exp_z, exp_w, out_path);
        }
        if (app.got_subcommand(sc_log)) {
            return cmd_log_or_betti("log", pt_curves, pt_points, pt_tol, out_path);
        }
        if (app.got_subcommand(sc_betti)) {
            return cmd_log_or_betti("betti", pt_curves, pt_points, pt_tol, out_path);
        }
        if (app.got_subcommand(sc_bound)) {
            return cmd_bound(bound_g, bound_delta, out_path);
        }
        if (app.got_subcommand(sc_lemmas)) {
            return cmd_lemmas(lemmas_trials, lemmas_seed, out_path);
        }
        if (app.got_subcommand(sc_torsion)) {
            return cmd_torsion(torsion_coords, torsion_qmax, torsion_tol, out_path);
        }
        if (app.got_subcommand(sc_intersect)) {
            uve::run_config rc;
            if (!config_path.empty()) {
                rc = uve::load_config_file(config_path);
            }
            for (const auto &c : is_curves) rc.curves.push_back(uve::parse_curve_spec(c));
            if (sc_intersect->count("--variety")) rc.variety_path = is_variety;
            if (sc_intersect->count("--resolution")) rc.resolution = is_resolution;
            if (sc_intersect->count("--tol")) rc.tol = is_tol;
            if (sc_intersect->count("--seed")) rc.seed = is_seed;
            if (sc_intersect->count("--height")) rc.height = is_height;
            if (sc_intersect->count("--qmax")) rc.qmax = is_qmax;
            if (sc_intersect->count("--workers")) rc.workers = is_workers;
            if (!out_path.empty()) rc.out_path = out_path;
            return cmd_intersect(rc, plot_path);
        }
        return 1;
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const uve::invalid_config &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const uve::syntax_error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const uve::empty_system &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const uve::inhomogeneous_degree &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const uve::error &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "internal failure: " << e.what() << "\n";
        return 2;
    }
}
