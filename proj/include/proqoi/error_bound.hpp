#ifndef PROQOI_ERROR_BOUND_HPP
#define PROQOI_ERROR_BOUND_HPP

/**
 * @file error_bound.hpp
 * Certified sup-norm error magnitude: either a finite nonnegative radius or
 * Unbounded (no guarantee can be given). Unbounded absorbs all arithmetic.
 */

#include <cmath>
#include <limits>
#include <stdexcept>

namespace proqoi {

class ErrorBound {
public:
    constexpr ErrorBound() noexcept : v_(0.0) {}

    explicit ErrorBound(double v) : v_(v) {
        if (std::isnan(v) || v < 0.0)
            throw std::invalid_argument("ErrorBound requires a nonnegative, non-NaN value");
    }

    static constexpr ErrorBound unbounded() noexcept {
        ErrorBound b;
        b.v_ = std::numeric_limits<double>::infinity();
        return b;
    }

    static constexpr ErrorBound zero() noexcept { return ErrorBound(); }

    bool is_unbounded() const noexcept { return std::isinf(v_); }
    bool is_finite() const noexcept { return !std::isinf(v_); }

    /// Finite radius, or +infinity when unbounded.
    double value() const noexcept { return v_; }

    /// Sum of bounds; Unbounded absorbs.
    friend ErrorBound operator+(ErrorBound a, ErrorBound b) noexcept {
        ErrorBound r;
        r.v_ = a.v_ + b.v_;
        return r;
    }

    /// Scaling by a nonnegative factor; Unbounded absorbs (even for factor 0,
    /// callers that want zero-weight annihilation must branch explicitly).
    friend ErrorBound operator*(double a, ErrorBound b) noexcept {
        ErrorBound r;
        if (b.is_unbounded()) {
            r.v_ = std::numeric_limits<double>::infinity();
            return r;
        }
        r.v_ = std::fabs(a) * b.v_;
        return r;
    }

    friend bool operator==(ErrorBound a, ErrorBound b) noexcept { return a.v_ == b.v_; }
    friend bool operator<(ErrorBound a, ErrorBound b) noexcept { return a.v_ < b.v_; }
    friend bool operator<=(ErrorBound a, ErrorBound b) noexcept { return a.v_ <= b.v_; }
    friend bool operator>(ErrorBound a, ErrorBound b) noexcept { return a.v_ > b.v_; }
    friend bool operator>=(ErrorBound a, ErrorBound b) noexcept { return a.v_ >= b.v_; }

private:
    double v_;
};

} // namespace proqoi

#endif // PROQOI_ERROR_BOUND_HPP
