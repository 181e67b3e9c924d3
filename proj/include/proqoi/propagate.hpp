#ifndef PROQOI_PROPAGATE_HPP
#define PROQOI_PROPAGATE_HPP

/**
 * @file propagate.hpp
 * Post-order propagation of per-variable absolute error radii through an
 * expression tree. Returns, for one data point, the expression's value on the
 * representative inputs plus a certified radius covering every admissible
 * true input (each within its per-variable radius).
 */

#include <optional>
#include <span>

#include "proqoi/error_bound.hpp"
#include "proqoi/expr.hpp"

namespace proqoi {

/// One data point: representative values and per-variable error radii,
/// indexed by Var index. Equal lengths required.
struct PointContext {
    std::span<const double> values;
    std::span<const ErrorBound> bounds;
};

struct Propagated {
    double value;
    ErrorBound bound;
};

/// Reciprocal-shift shape 1/(child + c): a Quotient whose numerator is the
/// constant 1 and whose denominator is a two-child unit-weight Sum of some
/// expression and a constant. Returns the child and the constant c.
struct RadicalShape {
    const QoiExpr* child;
    double c;
};
std::optional<RadicalShape> match_radical(const QoiExpr& expr);

/// Throws std::invalid_argument on malformed context (length mismatch, Var
/// out of range) and std::domain_error when a Sqrt child evaluates to a
/// negative value beyond the near-zero clamping tolerance.
Propagated propagate(const QoiExpr& expr, const PointContext& ctx);

} // namespace proqoi

#endif // PROQOI_PROPAGATE_HPP
