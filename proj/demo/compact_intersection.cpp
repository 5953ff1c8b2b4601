// Walkthrough: periods of a curve, the exponential of its universal
// extension, Betti coordinates, and a small intersection run against the
// maximal compact subgroup.

#include <complex>
#include <iostream>

#include <uve/bounds.hpp>
#include <uve/solver.hpp>
#include <uve/variety.hpp>

int main() {
    using cd = std::complex<double>;

    // Periods and quasi-periods of y^2 = 4x^3 - x - 2.
    const uve::curve_invariants<double> inv{cd(1, 0), cd(2, 0)};
    const uve::weierstrass_curve<double> curve(inv);
    const auto &pm = curve.periods();
    std::cout << "omega1 = " << pm.omega1 << "\n"
              << "omega2 = " << pm.omega2 << "\n"
              << "tau    = " << pm.tau() << "\n"
              << "|Legendre residual| = " << std::abs(pm.legendre_residual()) << "\n\n";

    // A point of the universal extension and its Betti coordinates.
    const uve::extension_config<double> cfg(std::vector<uve::curve_invariants<double>>{inv});
    uve::log_point<double> x;
    x.coords.push_back({0.31 * pm.omega1 + 0.22 * pm.omega2, cd(0.4, -0.1)});
    const auto pt = uve::exp_ue(cfg, x);
    const auto split = uve::betti_residual(cfg, pt);
    std::cout << "betti (p, q)     = (" << split.betti.pq[0][0] << ", " << split.betti.pq[0][1]
              << ")\n"
              << "compact residual = " << std::abs(split.residual[0]) << "\n\n";

    // Intersect the plane X3 = c X0 with the maximal compact subgroup.
    const auto spec = uve::parse_variety<double>("X3_1 - 0.7311*X0_1", 1);
    uve::solver_params<double> prm;
    prm.resolution = 32;
    const auto rep = uve::solve_intersection(cfg, spec, prm);
    std::cout << "intersection points found: " << rep.solutions.size() << "\n";
    for (const auto &s : rep.solutions) {
        std::cout << "  (p, q) = (" << s.betti.pq[0][0] << ", " << s.betti.pq[0][1]
                  << ")  residual " << s.residual << "\n";
    }
    std::cout << "\nisolated-point bound for g=1, delta=1: " << uve::n_iso_bound(1, 1) << "\n";
}
