#ifndef PROQOI_BUILTINS_HPP
#define PROQOI_BUILTINS_HPP

/**
 * @file builtins.hpp
 * Built-in aerodynamic derived quantities over the variable list
 * (Vx, Vy, Vz, P, D): total velocity, static temperature, speed of sound,
 * Mach number, total pressure, and Sutherland-law dynamic viscosity.
 * Fractional exponents are decomposed into integer powers times square
 * roots so every tree uses only the primitive node kinds.
 */

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "proqoi/expr.hpp"

namespace proqoi {

/// Variable order the builtin trees are expressed in: Vx, Vy, Vz, P, D.
std::span<const std::string> builtin_variable_names();

/// Named builtin quantities, in canonical order:
/// VTOT, T, C, Mach, PT, MU.
std::span<const std::pair<std::string, QoiExprPtr>> builtin_qois();

/// Lookup by name; nullptr when unknown.
QoiExprPtr find_builtin_qoi(std::string_view name);

} // namespace proqoi

#endif // PROQOI_BUILTINS_HPP
