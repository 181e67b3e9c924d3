#ifndef PROQOI_EXPR_HPP
#define PROQOI_EXPR_HPP

/**
 * @file expr.hpp
 * Immutable derived-quantity expression trees over a declared variable list.
 * Nodes: Var, Const, Scale, Sum (weighted), Product, Quotient, Power, Sqrt.
 * Factories validate invariants and fold fully constant subtrees eagerly.
 */

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace proqoi {

enum class QoiKind : unsigned char {
    Var,
    Const,
    Scale,
    Sum,
    Product,
    Quotient,
    Power,
    Sqrt,
};

class QoiExpr;
using QoiExprPtr = std::shared_ptr<const QoiExpr>;

class QoiExpr {
public:
    static QoiExprPtr var(std::size_t index);
    static QoiExprPtr constant(double a);
    /// Scale by a nonzero factor; a constant child folds to a Const node.
    static QoiExprPtr scale(double a, QoiExprPtr child);
    /// Weighted sum; children and weights must be non-empty and equal length.
    static QoiExprPtr sum(std::vector<QoiExprPtr> children, std::vector<double> weights);
    static QoiExprPtr product(QoiExprPtr a, QoiExprPtr b);
    static QoiExprPtr quotient(QoiExprPtr num, QoiExprPtr den);
    /// Integer power, n >= 1.
    static QoiExprPtr power(QoiExprPtr child, int n);
    static QoiExprPtr sqrt(QoiExprPtr child);

    QoiKind kind() const noexcept { return kind_; }
    /// Const value or Scale factor.
    double scalar() const noexcept { return scalar_; }
    int exponent() const noexcept { return exponent_; }
    std::size_t var_index() const noexcept { return var_index_; }
    const std::vector<QoiExprPtr>& children() const noexcept { return children_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    /// 1 + largest Var index in the tree (0 when no variables occur).
    std::size_t variable_count_required() const;

    /// Parenthesized rendering for diagnostics, with variables as v<i>.
    std::string to_string() const;

private:
    QoiExpr() = default;

    QoiKind kind_ = QoiKind::Const;
    double scalar_ = 0.0;
    int exponent_ = 0;
    std::size_t var_index_ = 0;
    std::vector<QoiExprPtr> children_;
    std::vector<double> weights_;
};

/// Strict evaluation at a point. Throws std::domain_error for Sqrt of a
/// negative argument or a Quotient with zero denominator, and
/// std::invalid_argument when a Var index is out of range of `values`.
double eval(const QoiExpr& expr, std::span<const double> values);

/// Exact integer power by repeated multiplication (n >= 0).
double ipow(double x, int n) noexcept;

} // namespace proqoi

#endif // PROQOI_EXPR_HPP
