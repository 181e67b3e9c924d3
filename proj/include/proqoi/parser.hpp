#ifndef PROQOI_PARSER_HPP
#define PROQOI_PARSER_HPP

/**
 * @file parser.hpp
 * Text form for derived-quantity expressions.
 *
 * Grammar (whitespace insignificant):
 *   expr   := term (('+'|'-') term)*
 *   term   := factor (('*'|'/') factor)*
 *   factor := base ('^' INTEGER)?
 *   base   := '-' base | NUMBER | IDENT | '(' expr ')' | 'sqrt' '(' expr ')'
 *
 * '^' binds tighter than '*'. Unary minus applies to the base it precedes.
 * a-b desugars to a unit-weight Sum with weights [1,-1]; division by a
 * constant becomes a Scale; fully constant subtrees fold eagerly.
 */

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "proqoi/expr.hpp"

namespace proqoi {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t offset);
    /// Byte offset into the input at which the problem was detected.
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Parses `text` against the declared variable list; identifiers resolve to
/// Var indices by position in `variable_names`. Throws ParseError with a byte
/// offset on syntax errors, unknown identifiers, and invalid exponents.
QoiExprPtr parse_qoi(std::string_view text, std::span<const std::string> variable_names);

} // namespace proqoi

#endif // PROQOI_PARSER_HPP
