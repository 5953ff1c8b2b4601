#pragma once

#include <stdexcept>
#include <string>

namespace uve {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The discriminant g2^3 - 27 g3^2 is (numerically) zero.
struct degenerate_curve : error {
    using error::error;
};

/// An iteration failed to reach its precision target.
struct no_convergence : error {
    using error::error;
};

/// The argument is too close to a lattice point.
struct pole_at_lattice_point : error {
    using error::error;
};

/// A point does not satisfy the model equations within tolerance.
struct not_on_model : error {
    using error::error;
};

/// Malformed polynomial or configuration text. Carries a position.
struct syntax_error : error {
    syntax_error(const std::string &msg, std::size_t line, std::size_t col)
        : error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(col) + ")"),
          line(line), col(col) {}
    std::size_t line;
    std::size_t col;
};

/// Declared-homogeneous input with mismatched per-factor degrees.
struct inhomogeneous_degree : error {
    using error::error;
};

/// A variety with no defining polynomials.
struct empty_system : error {
    using error::error;
};

/// Solver invoked above the configured dimension guard.
struct dimension_guard : error {
    using error::error;
};

/// An exact-arithmetic instance violated its stated preconditions.
struct precondition_violated : error {
    using error::error;
};

/// Invalid run configuration (CLI / config file validation).
struct invalid_config : error {
    using error::error;
};

} // namespace uve
