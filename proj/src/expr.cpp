#include "proqoi/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace proqoi {

QoiExprPtr QoiExpr::var(std::size_t index) {
    auto n = std::shared_ptr<QoiExpr>(new QoiExpr());
    n->kind_ = QoiKind::Var;
    n->var_index_ = index;
    return n;
}

QoiExprPtr QoiExpr::constant(double a) {
    if (std::isnan(a))
        throw std::invalid_argument("constant must not be NaN");
    auto n = std::shared_ptr<QoiExpr>(new QoiExpr());
    n->kind_ = QoiKind::Const;
    n->scalar_ = a;
    return n;
}

QoiExprPtr QoiExpr::scale(double a, QoiExprPtr child) {
    if (!child)
        throw std::invalid_argument("scale requires a child");
    if (a == 0.0 || std::isnan(a))
        throw std::invalid_argument("scale factor must be nonzero and non-NaN");
    if (child->kind() == QoiKind::Const)
        return constant(a * child->scalar());
    auto n = std::shared_ptr<QoiExpr>(new QoiExpr());
    n->kind_ = QoiKind::Scale;
    n->scalar_ = a;
    n->children_.push_back(std::move(child));
    return n;
}

QoiExprPtr QoiExpr::sum(std::vector<QoiExprPtr> children, std::vector<double> weights) {
    if (children.empty() || children.size() != weights.size())
        throw std::invalid_argument("sum requires equally many children and weights, at least one");
    for (const auto& c : children)
        if (!c)
            throw std::invalid_argument("sum child must not be null");
    bool all_const = std::all_of(children.begin(), children.end(), [](const QoiExprPtr& c) {
        return c->kind() == QoiKind::Const;
    });
    if (all_const) {
        double acc = 0.0;
        for (std::size_t i = 0; i < children.size(); ++i)
            acc += weights[i] * children[i]->scalar();
        return constant(acc);
    }
    auto n = std::shared_ptr<QoiExpr>(new QoiExpr());
    n->kind_ = QoiKind::Sum;
    n->children_ = std::move(children);
    n->weights_ = std::move(weights);
    return n;
}

QoiExprPtr QoiExpr::product(QoiExprPtr a, QoiExprPtr b) {
    if (!a || !b)
        throw std::invalid_argument("product requires two children");
    if (a->kind() == QoiKind::Const && b->kind() == QoiKind::Const)
        return constant(a->scalar() * b->scalar());
    auto n = std::shared_ptr<QoiExpr>(new QoiExpr());
    n->kind_ = QoiKind::Product;
    n->children_.push_back(std::move(a));
    n->children_.push_back(std::move(b));
    return n;
}

QoiExprPtr QoiExpr::quotient(QoiExprPtr num, QoiExprPtr den) {
    if (!num || !den)
        throw std::invalid_argument("quotient requires two children");
    if (num->kind() == QoiKind::Const && den->kind() == QoiKind::Const) {
        if (den->scalar() == 0.0)
            throw std::domain_error("constant quotient has zero denominator");
        return constant(num->scalar() / den->scalar());
    }
    auto n = std::shared_ptr<QoiExpr>(new QoiExpr());
    n->kind_ = QoiKind::Quotient;
    n->children_.push_back(std::move(num));
    n->children_.push_back(std::move(den));
    return n;
}

QoiExprPtr QoiExpr::power(QoiExprPtr child, int n) {
    if (!child)
        throw std::invalid_argument("power requires a child");
    if (n < 1)
        throw std::invalid_argument("power exponent must be a positive integer");
    if (child->kind() == QoiKind::Const)
        return constant(ipow(child->scalar(), n));
    auto node = std::shared_ptr<QoiExpr>(new QoiExpr());
    node->kind_ = QoiKind::Power;
    node->exponent_ = n;
    node->children_.push_back(std::move(child));
    return node;
}

QoiExprPtr QoiExpr::sqrt(QoiExprPtr child) {
    if (!child)
        throw std::invalid_argument("sqrt requires a child");
    if (child->kind() == QoiKind::Const) {
        if (child->scalar() < 0.0)
            throw std::domain_error("sqrt of a negative constant");
        return constant(std::sqrt(child->scalar()));
    }
    auto n = std::shared_ptr<QoiExpr>(new QoiExpr());
    n->kind_ = QoiKind::Sqrt;
    n->children_.push_back(std::move(child));
    return n;
}

std::size_t QoiExpr::variable_count_required() const {
    std::size_t need = 0;
    if (kind_ == QoiKind::Var)
        need = var_index_ + 1;
    for (const auto& c : children_)
        need = std::max(need, c->variable_count_required());
    return need;
}

std::string QoiExpr::to_string() const {
    std::ostringstream os;
    switch (kind_) {
    case QoiKind::Var:
        os << "v" << var_index_;
        break;
    case QoiKind::Const:
        os << scalar_;
        break;
    case QoiKind::Scale:
        os << scalar_ << "*(" << children_[0]->to_string() << ")";
        break;
    case QoiKind::Sum: {
        os << "(";
        for (std::size_t i = 0; i < children_.size(); ++i) {
            if (i)
                os << " + ";
            os << weights_[i] << "*" << children_[i]->to_string();
        }
        os << ")";
        break;
    }
    case QoiKind::Product:
        os << "(" << children_[0]->to_string() << " * " << children_[1]->to_string() << ")";
        break;
    case QoiKind::Quotient:
        os << "(" << children_[0]->to_string() << " / " << children_[1]->to_string() << ")";
        break;
    case QoiKind::Power:
        os << "(" << children_[0]->to_string() << ")^" << exponent_;
        break;
    case QoiKind::Sqrt:
        os << "sqrt(" << children_[0]->to_string() << ")";
        break;
    }
    return os.str();
}

double ipow(double x, int n) noexcept {
    double acc = 1.0;
    double base = x;
    unsigned e = n < 0 ? 0u : static_cast<unsigned>(n);
    while (e) {
        if (e & 1u)
            acc *= base;
        base *= base;
        e >>= 1u;
    }
    return acc;
}

double eval(const QoiExpr& expr, std::span<const double> values) {
    switch (expr.kind()) {
    case QoiKind::Var: {
        if (expr.var_index() >= values.size())
            throw std::invalid_argument("variable index out of range of supplied values");
        return values[expr.var_index()];
    }
    case QoiKind::Const:
        return expr.scalar();
    case QoiKind::Scale:
        return expr.scalar() * eval(*expr.children()[0], values);
    case QoiKind::Sum: {
        double acc = 0.0;
        const auto& ch = expr.children();
        const auto& w = expr.weights();
        for (std::size_t i = 0; i < ch.size(); ++i)
            acc += w[i] * eval(*ch[i], values);
        return acc;
    }
    case QoiKind::Product:
        return eval(*expr.children()[0], values) * eval(*expr.children()[1], values);
    case QoiKind::Quotient: {
        double num = eval(*expr.children()[0], values);
        double den = eval(*expr.children()[1], values);
        if (den == 0.0)
            throw std::domain_error("quotient denominator evaluated to zero");
        return num / den;
    }
    case QoiKind::Power:
        return ipow(eval(*expr.children()[0], values), expr.exponent());
    case QoiKind::Sqrt: {
        double v = eval(*expr.children()[0], values);
        if (v < 0.0)
            throw std::domain_error("sqrt of a negative argument");
        return std::sqrt(v);
    }
    }
    throw std::logic_error("unreachable expression kind");
}

} // namespace proqoi
