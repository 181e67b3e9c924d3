#ifndef PROQOI_BOUNDS_HPP
#define PROQOI_BOUNDS_HPP

/**
 * @file bounds.hpp
 * Certified sup-error propagation rules for the primitive operations.
 *
 * Each bound_* answers: given a representative value x known to lie within
 * eps of the true value (in absolute terms), how far can the operation's
 * result drift? The returned radius is an upper bound on that drift for
 * every admissible true value. Finite nonzero results are inflated by a
 * small relative guard so that floating-point rounding of the formula can
 * never understate the analytic bound.
 */

#include <span>

#include "proqoi/error_bound.hpp"

namespace proqoi {

/// Upward guard applied to every finite nonzero bound result.
double bound_guard(double v) noexcept;

/// |x'^n - x^n| <= sum_{i=1..n} C(n,i) |x|^{n-i} eps^i for |x'-x| <= eps.
/// Requires n >= 1 (throws std::invalid_argument otherwise).
ErrorBound bound_power(int n, double x, ErrorBound eps);

/// |sqrt(x') - sqrt(x)| <= eps / (sqrt(max(x-eps,0)) + sqrt(x)) for x > 0.
/// At x == 0 the drift is at most sqrt(eps). Throws std::domain_error for
/// x < 0. Unbounded input propagates.
ErrorBound bound_sqrt(double x, ErrorBound eps);

/// f(x) = 1/(x + c). Returns eps / (min(|x+c-eps|, |x+c+eps|) * |x+c|) when
/// x + c != 0 and eps < |x+c|; otherwise Unbounded.
ErrorBound bound_radical(double c, double x, ErrorBound eps);

/// Weighted sum: sum_i |a_i| eps_i. A zero weight annihilates its term even
/// when that term's bound is Unbounded; any Unbounded term with a nonzero
/// weight makes the result Unbounded.
ErrorBound bound_weighted_sum(std::span<const double> weights, std::span<const ErrorBound> eps);

/// Product: |x1| eps2 + |x2| eps1 + eps1 eps2. Unbounded propagates.
ErrorBound bound_product(double x1, ErrorBound eps1, double x2, ErrorBound eps2);

/// Quotient x1/x2: (|x1| eps2 + |x2| eps1) / (|x2| * min(|x2-eps2|, |x2+eps2|))
/// when x2 != 0 and eps2 < |x2|; otherwise Unbounded. Unbounded eps1 also
/// yields Unbounded.
ErrorBound bound_quotient(double x1, ErrorBound eps1, double x2, ErrorBound eps2);

} // namespace proqoi

#endif // PROQOI_BOUNDS_HPP
