#include "proqoi/bounds.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <stdexcept>

namespace proqoi {

// Formula interiors run in long double so that the single rounding of the
// final cast is the only double-precision error; the guard below then covers
// it with room to spare. (On x86-64 long double carries 64 mantissa bits.)

double bound_guard(double v) noexcept {
    // One-sided inflation so that the handful of roundings inside each bound
    // formula cannot push the computed value below the analytic one.
    return v * (1.0 + 4.0 * DBL_EPSILON);
}

static ErrorBound guarded(long double v) {
    if (v == 0.0L)
        return ErrorBound::zero();
    return ErrorBound(bound_guard(static_cast<double>(v)));
}

ErrorBound bound_power(int n, double x, ErrorBound eps) {
    if (n < 1)
        throw std::invalid_argument("bound_power requires a positive integer exponent");
    if (eps.is_unbounded())
        return ErrorBound::unbounded();
    const long double e = eps.value();
    if (e == 0.0L)
        return ErrorBound::zero();
    const long double ax = std::fabs(static_cast<long double>(x));
    // sum_{i=1..n} C(n,i) ax^{n-i} e^i, with the binomial coefficient updated
    // incrementally: C(n,i) = C(n,i-1) * (n-i+1) / i.
    long double total = 0.0L;
    long double binom = 1.0L;
    for (int i = 1; i <= n; ++i) {
        binom = binom * static_cast<long double>(n - i + 1) / static_cast<long double>(i);
        total += binom * std::pow(ax, static_cast<long double>(n - i)) *
                 std::pow(e, static_cast<long double>(i));
    }
    return guarded(total);
}

ErrorBound bound_sqrt(double x, ErrorBound eps) {
    if (std::isnan(x) || x < 0.0)
        throw std::domain_error("bound_sqrt requires a nonnegative value");
    if (eps.is_unbounded())
        return ErrorBound::unbounded();
    const long double e = eps.value();
    if (e == 0.0L)
        return ErrorBound::zero();
    const long double lx = x;
    if (x == 0.0)
        return guarded(std::sqrt(e));
    const long double denom = std::sqrt(std::max(lx - e, 0.0L)) + std::sqrt(lx);
    return guarded(e / denom);
}

ErrorBound bound_radical(double c, double x, ErrorBound eps) {
    const double s = x + c;
    if (s == 0.0 || std::isnan(s))
        return ErrorBound::unbounded();
    if (eps.is_unbounded())
        return ErrorBound::unbounded();
    const double e = eps.value();
    const double as = std::fabs(s);
    if (e >= as)
        return ErrorBound::unbounded();
    if (e == 0.0)
        return ErrorBound::zero();
    const long double ls = static_cast<long double>(x) + static_cast<long double>(c);
    const long double le = e;
    const long double lo = std::min(std::fabs(ls - le), std::fabs(ls + le));
    return guarded(le / (lo * std::fabs(static_cast<long double>(s))));
}

ErrorBound bound_weighted_sum(std::span<const double> weights, std::span<const ErrorBound> eps) {
    if (weights.size() != eps.size())
        throw std::invalid_argument("bound_weighted_sum requires equal-length spans");
    long double total = 0.0L;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0)
            continue; // zero weight annihilates the term, Unbounded included
        if (eps[i].is_unbounded())
            return ErrorBound::unbounded();
        total += std::fabs(static_cast<long double>(weights[i])) *
                 static_cast<long double>(eps[i].value());
    }
    return guarded(total);
}

ErrorBound bound_product(double x1, ErrorBound eps1, double x2, ErrorBound eps2) {
    if (eps1.is_unbounded() || eps2.is_unbounded())
        return ErrorBound::unbounded();
    const long double e1 = eps1.value();
    const long double e2 = eps2.value();
    const long double total = std::fabs(static_cast<long double>(x1)) * e2 +
                              std::fabs(static_cast<long double>(x2)) * e1 + e1 * e2;
    return guarded(total);
}

ErrorBound bound_quotient(double x1, ErrorBound eps1, double x2, ErrorBound eps2) {
    if (eps1.is_unbounded() || eps2.is_unbounded())
        return ErrorBound::unbounded();
    if (x2 == 0.0 || std::isnan(x2))
        return ErrorBound::unbounded();
    const double e2d = eps2.value();
    const double ax2d = std::fabs(x2);
    if (e2d >= ax2d)
        return ErrorBound::unbounded();
    const long double e1 = eps1.value();
    const long double e2 = e2d;
    const long double lx2 = x2;
    const long double ax2 = std::fabs(lx2);
    const long double num = std::fabs(static_cast<long double>(x1)) * e2 + ax2 * e1;
    if (num == 0.0L)
        return ErrorBound::zero();
    const long double den = ax2 * std::min(std::fabs(lx2 - e2), std::fabs(lx2 + e2));
    return guarded(num / den);
}

} // namespace proqoi
