#include "proqoi/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace proqoi {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : std::runtime_error("parse error at byte " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

namespace {

class Parser {
public:
    Parser(std::string_view text, std::span<const std::string> names)
        : text_(text), names_(names) {}

    QoiExprPtr run() {
        QoiExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    std::span<const std::string> names_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    QoiExprPtr parse_expr() {
        std::vector<QoiExprPtr> terms;
        std::vector<double> weights;
        terms.push_back(parse_term());
        weights.push_back(1.0);
        for (;;) {
            char c = peek();
            if (c == '+' || c == '-') {
                ++pos_;
                terms.push_back(parse_term());
                weights.push_back(c == '+' ? 1.0 : -1.0);
            } else {
                break;
            }
        }
        if (terms.size() == 1 && weights[0] == 1.0)
            return terms[0];
        return QoiExpr::sum(std::move(terms), std::move(weights));
    }

    QoiExprPtr parse_term() {
        QoiExprPtr cur = parse_factor();
        for (;;) {
            char c = peek();
            if (c == '*') {
                std::size_t at = pos_;
                ++pos_;
                cur = combine_mul(std::move(cur), parse_factor(), at);
            } else if (c == '/') {
                std::size_t at = pos_;
                ++pos_;
                cur = combine_div(std::move(cur), parse_factor(), at);
            } else {
                break;
            }
        }
        return cur;
    }

    static QoiExprPtr combine_mul(QoiExprPtr a, QoiExprPtr b, std::size_t at) {
        const bool ac = a->kind() == QoiKind::Const;
        const bool bc = b->kind() == QoiKind::Const;
        (void)at;
        if (ac && bc)
            return QoiExpr::constant(a->scalar() * b->scalar());
        if (ac)
            return a->scalar() == 0.0 ? QoiExpr::constant(0.0) : QoiExpr::scale(a->scalar(), std::move(b));
        if (bc)
            return b->scalar() == 0.0 ? QoiExpr::constant(0.0) : QoiExpr::scale(b->scalar(), std::move(a));
        return QoiExpr::product(std::move(a), std::move(b));
    }

    static QoiExprPtr combine_div(QoiExprPtr a, QoiExprPtr b, std::size_t at) {
        const bool ac = a->kind() == QoiKind::Const;
        const bool bc = b->kind() == QoiKind::Const;
        if (bc) {
            if (b->scalar() == 0.0)
                throw ParseError("division by a zero constant", at);
            if (ac)
                return QoiExpr::constant(a->scalar() / b->scalar());
            return QoiExpr::scale(1.0 / b->scalar(), std::move(a));
        }
        return QoiExpr::quotient(std::move(a), std::move(b));
    }

    QoiExprPtr parse_factor() {
        QoiExprPtr base = parse_base();
        if (peek() == '^') {
            std::size_t at = pos_;
            ++pos_;
            int n = parse_exponent(at);
            if (base->kind() == QoiKind::Const)
                return QoiExpr::constant(ipow(base->scalar(), n));
            return QoiExpr::power(std::move(base), n);
        }
        return base;
    }

    int parse_exponent(std::size_t op_at) {
        skip_ws();
        std::size_t at = pos_;
        if (at >= text_.size())
            throw ParseError("expected an integer exponent after '^'", op_at);
        if (text_[at] == '-' || text_[at] == '+')
            throw ParseError("exponent must be a positive integer", at);
        std::size_t end = at;
        while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end])))
            ++end;
        if (end == at)
            throw ParseError("expected an integer exponent after '^'", at);
        if (end < text_.size() && (text_[end] == '.' || text_[end] == 'e' || text_[end] == 'E'))
            throw ParseError("exponent must be a positive integer", at);
        int n = 0;
        auto [p, ec] = std::from_chars(text_.data() + at, text_.data() + end, n);
        if (ec != std::errc() || p != text_.data() + end)
            throw ParseError("exponent is out of range", at);
        if (n < 1)
            throw ParseError("exponent must be a positive integer", at);
        pos_ = end;
        return n;
    }

    QoiExprPtr parse_base() {
        skip_ws();
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '-') {
            ++pos_;
            QoiExprPtr inner = parse_base();
            if (inner->kind() == QoiKind::Const)
                return QoiExpr::constant(-inner->scalar());
            return QoiExpr::scale(-1.0, std::move(inner));
        }
        if (c == '(') {
            std::size_t at = pos_;
            ++pos_;
            QoiExprPtr e = parse_expr();
            if (!consume(')'))
                throw ParseError("missing ')' for '(' at byte " + std::to_string(at), pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    QoiExprPtr parse_number() {
        std::size_t at = pos_;
        double v = 0.0;
        auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
        if (ec != std::errc() || p == text_.data() + pos_)
            throw ParseError("malformed number", at);
        pos_ = static_cast<std::size_t>(p - text_.data());
        return QoiExpr::constant(v);
    }

    QoiExprPtr parse_ident() {
        std::size_t at = pos_;
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
            ++end;
        std::string_view name = text_.substr(at, end - at);
        pos_ = end;
        if (name == "sqrt") {
            if (!consume('('))
                throw ParseError("expected '(' after sqrt", pos_);
            QoiExprPtr e = parse_expr();
            if (!consume(')'))
                throw ParseError("missing ')' closing sqrt(", pos_);
            if (e->kind() == QoiKind::Const && e->scalar() < 0.0)
                throw ParseError("sqrt of a negative constant", at);
            return QoiExpr::sqrt(std::move(e));
        }
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name)
                return QoiExpr::var(i);
        throw ParseError("unknown identifier '" + std::string(name) + "'", at);
    }
};

} // namespace

QoiExprPtr parse_qoi(std::string_view text, std::span<const std::string> variable_names) {
    return Parser(text, variable_names).run();
}

} // namespace proqoi
