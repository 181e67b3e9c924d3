#include "proqoi/builtins.hpp"

namespace proqoi {

namespace {

// Air model constants.
constexpr double specific_gas_constant = 287.1;   // J/(kg K)
constexpr double heat_capacity_ratio = 1.4;       // gamma
constexpr double reference_viscosity = 1.716e-5;  // Pa s
constexpr double reference_temperature = 273.15;  // K
constexpr double sutherland_constant = 110.4;     // K

enum VarIdx : std::size_t { Vx = 0, Vy = 1, Vz = 2, P = 3, D = 4 };

QoiExprPtr make_vtot() {
    std::vector<QoiExprPtr> squares;
    squares.push_back(QoiExpr::power(QoiExpr::var(Vx), 2));
    squares.push_back(QoiExpr::power(QoiExpr::var(Vy), 2));
    squares.push_back(QoiExpr::power(QoiExpr::var(Vz), 2));
    return QoiExpr::sqrt(QoiExpr::sum(std::move(squares), {1.0, 1.0, 1.0}));
}

QoiExprPtr make_temperature() {
    // T = P / (D * R)
    return QoiExpr::quotient(QoiExpr::var(P),
                             QoiExpr::scale(specific_gas_constant, QoiExpr::var(D)));
}

QoiExprPtr make_sound_speed() {
    // C = sqrt(gamma * R * T)
    return QoiExpr::sqrt(
        QoiExpr::scale(heat_capacity_ratio * specific_gas_constant, make_temperature()));
}

QoiExprPtr make_mach() { return QoiExpr::quotient(make_vtot(), make_sound_speed()); }

QoiExprPtr make_total_pressure() {
    // PT = P * (1 + (gamma-1)/2 * Mach^2)^(gamma/(gamma-1)), where the
    // exponent gamma/(gamma-1) = 3.5 is expressed as x^3.5 = x^3 * sqrt(x).
    QoiExprPtr mach = make_mach();
    QoiExprPtr mach_sq = QoiExpr::product(mach, mach);
    std::vector<QoiExprPtr> terms;
    terms.push_back(QoiExpr::constant(1.0));
    terms.push_back(QoiExpr::scale((heat_capacity_ratio - 1.0) / 2.0, std::move(mach_sq)));
    QoiExprPtr base = QoiExpr::sum(std::move(terms), {1.0, 1.0});
    QoiExprPtr powered = QoiExpr::product(QoiExpr::power(base, 3), QoiExpr::sqrt(base));
    return QoiExpr::product(QoiExpr::var(P), std::move(powered));
}

QoiExprPtr make_viscosity() {
    // MU = mu_ref * (T/T_ref)^1.5 * (T_ref + S) / (T + S),
    // with x^1.5 = x * sqrt(x) and 1/(T + S) in reciprocal-shift form.
    QoiExprPtr t = make_temperature();
    QoiExprPtr ratio = QoiExpr::scale(1.0 / reference_temperature, t);
    QoiExprPtr ratio_15 = QoiExpr::product(ratio, QoiExpr::sqrt(ratio));
    std::vector<QoiExprPtr> shifted;
    shifted.push_back(t);
    shifted.push_back(QoiExpr::constant(sutherland_constant));
    QoiExprPtr radical = QoiExpr::quotient(
        QoiExpr::constant(1.0), QoiExpr::sum(std::move(shifted), {1.0, 1.0}));
    return QoiExpr::scale(reference_viscosity * (reference_temperature + sutherland_constant),
                          QoiExpr::product(std::move(ratio_15), std::move(radical)));
}

const std::vector<std::string>& variable_names_storage() {
    static const std::vector<std::string> names = {"Vx", "Vy", "Vz", "P", "D"};
    return names;
}

const std::vector<std::pair<std::string, QoiExprPtr>>& qois_storage() {
    static const std::vector<std::pair<std::string, QoiExprPtr>> qois = {
        {"VTOT", make_vtot()},
        {"T", make_temperature()},
        {"C", make_sound_speed()},
        {"Mach", make_mach()},
        {"PT", make_total_pressure()},
        {"MU", make_viscosity()},
    };
    return qois;
}

} // namespace

std::span<const std::string> builtin_variable_names() { return variable_names_storage(); }

std::span<const std::pair<std::string, QoiExprPtr>> builtin_qois() { return qois_storage(); }

QoiExprPtr find_builtin_qoi(std::string_view name) {
    for (const auto& [qname, expr] : qois_storage())
        if (qname == name)
            return expr;
    return nullptr;
}

} // namespace proqoi
