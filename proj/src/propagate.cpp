#include "proqoi/propagate.hpp"

#include <cmath>
#include <stdexcept>

#include "proqoi/bounds.hpp"

namespace proqoi {

std::optional<RadicalShape> match_radical(const QoiExpr& expr) {
    if (expr.kind() != QoiKind::Quotient)
        return std::nullopt;
    const QoiExpr& num = *expr.children()[0];
    if (num.kind() != QoiKind::Const || num.scalar() != 1.0)
        return std::nullopt;
    const QoiExpr& den = *expr.children()[1];
    if (den.kind() != QoiKind::Sum || den.children().size() != 2)
        return std::nullopt;
    if (den.weights()[0] != 1.0 || den.weights()[1] != 1.0)
        return std::nullopt;
    const QoiExpr& a = *den.children()[0];
    const QoiExpr& b = *den.children()[1];
    if (b.kind() == QoiKind::Const && a.kind() != QoiKind::Const)
        return RadicalShape{&a, b.scalar()};
    if (a.kind() == QoiKind::Const && b.kind() != QoiKind::Const)
        return RadicalShape{&b, a.scalar()};
    return std::nullopt;
}

static Propagated propagate_node(const QoiExpr& expr, const PointContext& ctx) {
    switch (expr.kind()) {
    case QoiKind::Var: {
        const std::size_t i = expr.var_index();
        if (i >= ctx.values.size())
            throw std::invalid_argument("variable index out of range of point context");
        return {ctx.values[i], ctx.bounds[i]};
    }
    case QoiKind::Const:
        return {expr.scalar(), ErrorBound::zero()};
    case QoiKind::Scale: {
        Propagated c = propagate_node(*expr.children()[0], ctx);
        // Exact covariance: scaling by a is scaling the radius by |a|.
        return {expr.scalar() * c.value, expr.scalar() * c.bound};
    }
    case QoiKind::Sum: {
        const auto& ch = expr.children();
        const auto& w = expr.weights();
        double acc = 0.0;
        ErrorBound child_bounds_stack[8];
        std::vector<ErrorBound> child_bounds_heap;
        std::span<ErrorBound> child_bounds;
        if (ch.size() <= 8) {
            child_bounds = std::span<ErrorBound>(child_bounds_stack, ch.size());
        } else {
            child_bounds_heap.resize(ch.size());
            child_bounds = child_bounds_heap;
        }
        for (std::size_t i = 0; i < ch.size(); ++i) {
            Propagated c = propagate_node(*ch[i], ctx);
            acc += w[i] * c.value;
            child_bounds[i] = c.bound;
        }
        return {acc, bound_weighted_sum(w, child_bounds)};
    }
    case QoiKind::Product: {
        Propagated a = propagate_node(*expr.children()[0], ctx);
        Propagated b = propagate_node(*expr.children()[1], ctx);
        return {a.value * b.value, bound_product(a.value, a.bound, b.value, b.bound)};
    }
    case QoiKind::Quotient: {
        if (auto rad = match_radical(expr)) {
            Propagated c = propagate_node(*rad->child, ctx);
            const double s = c.value + rad->c;
            // IEEE division keeps the value total; the bound covers the rest.
            return {1.0 / s, bound_radical(rad->c, c.value, c.bound)};
        }
        Propagated a = propagate_node(*expr.children()[0], ctx);
        Propagated b = propagate_node(*expr.children()[1], ctx);
        return {a.value / b.value, bound_quotient(a.value, a.bound, b.value, b.bound)};
    }
    case QoiKind::Power: {
        Propagated c = propagate_node(*expr.children()[0], ctx);
        return {ipow(c.value, expr.exponent()), bound_power(expr.exponent(), c.value, c.bound)};
    }
    case QoiKind::Sqrt: {
        Propagated c = propagate_node(*expr.children()[0], ctx);
        double v = c.value;
        if (v < 0.0) {
            // Sums of squares and similar analytically nonnegative inputs can
            // land a hair below zero in floating point; clamp those, reject
            // genuinely negative values.
            const double tol = 1e-12 * (1.0 + std::fabs(v));
            if (v >= -tol)
                v = 0.0;
            else
                throw std::domain_error("sqrt child is negative beyond the clamping tolerance");
        }
        if (std::isnan(v))
            throw std::domain_error("sqrt child is NaN");
        return {std::sqrt(v), bound_sqrt(v, c.bound)};
    }
    }
    throw std::logic_error("unreachable expression kind");
}

Propagated propagate(const QoiExpr& expr, const PointContext& ctx) {
    if (ctx.values.size() != ctx.bounds.size())
        throw std::invalid_argument("point context values/bounds length mismatch");
    return propagate_node(expr, ctx);
}

} // namespace proqoi
