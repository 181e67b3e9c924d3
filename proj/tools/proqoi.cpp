// proqoi: refactor floating-point arrays into progressive multi-precision
// segment stores and retrieve the minimum needed to meet derived-quantity
// error tolerances.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "proqoi/builtins.hpp"
#include "proqoi/codec.hpp"
#include "proqoi/ingest.hpp"
#include "proqoi/parser.hpp"
#include "proqoi/retriever.hpp"
#include "proqoi/store.hpp"
#include "proqoi/synth.hpp"
#include "proqoi/variable.hpp"

namespace fs = std::filesystem;
using namespace proqoi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUnsatisfied = 2;

void collect_used_vars(const QoiExpr& e, std::set<std::size_t>& out) {
    if (e.kind() == QoiKind::Var)
        out.insert(e.var_index());
    for (const auto& child : e.children())
        collect_used_vars(*child, out);
}

QoiExprPtr remap_vars(const QoiExprPtr& e, const std::vector<std::size_t>& map) {
    switch (e->kind()) {
    case QoiKind::Var:
        return QoiExpr::var(map.at(e->var_index()));
    case QoiKind::Const:
        return e;
    case QoiKind::Scale:
        return QoiExpr::scale(e->scalar(), remap_vars(e->children()[0], map));
    case QoiKind::Sum: {
        std::vector<QoiExprPtr> children;
        for (const auto& c : e->children())
            children.push_back(remap_vars(c, map));
        return QoiExpr::sum(std::move(children), e->weights());
    }
    case QoiKind::Product:
        return QoiExpr::product(remap_vars(e->children()[0], map),
                                remap_vars(e->children()[1], map));
    case QoiKind::Quotient:
        return QoiExpr::quotient(remap_vars(e->children()[0], map),
                                 remap_vars(e->children()[1], map));
    case QoiKind::Power:
        return QoiExpr::power(remap_vars(e->children()[0], map), e->exponent());
    case QoiKind::Sqrt:
        return QoiExpr::sqrt(remap_vars(e->children()[0], map));
    }
    throw std::logic_error("unhandled expression node");
}

bool is_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    for (char ch : s)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'))
            return false;
    return true;
}

// Resolves an expression string against the store's variable names. A bare
// identifier that names a builtin quantity (and is not itself a variable)
// expands to the builtin tree with its variables looked up by name.
QoiExprPtr resolve_expr(const std::string& text, std::span<const std::string> var_names,
                        const std::string& qoi_name) {
    std::string trimmed = text;
    trimmed.erase(trimmed.begin(),
                  std::find_if(trimmed.begin(), trimmed.end(),
                               [](unsigned char c) { return !std::isspace(c); }));
    trimmed.erase(std::find_if(trimmed.rbegin(), trimmed.rend(),
                               [](unsigned char c) { return !std::isspace(c); })
                      .base(),
                  trimmed.end());
    const bool is_var =
        std::find(var_names.begin(), var_names.end(), trimmed) != var_names.end();
    if (is_identifier(trimmed) && !is_var) {
        if (const QoiExprPtr builtin = find_builtin_qoi(trimmed)) {
            const auto builtin_names = builtin_variable_names();
            std::set<std::size_t> used;
            collect_used_vars(*builtin, used);
            std::vector<std::size_t> map(builtin_names.size(), 0);
            for (std::size_t i : used) {
                const auto it =
                    std::find(var_names.begin(), var_names.end(), builtin_names[i]);
                if (it == var_names.end())
                    throw std::runtime_error("QoI '" + qoi_name + "': builtin '" + trimmed +
                                             "' needs a variable named '" + builtin_names[i] +
                                             "', which the store does not hold");
                map[i] = static_cast<std::size_t>(it - var_names.begin());
            }
            return remap_vars(builtin, map);
        }
    }
    return parse_qoi(trimmed, var_names);
}

// "name=expr@tau" (retrieve) or "name=expr" (sweep, tau supplied per rung).
struct QoiSpec {
    std::string name;
    std::string expr_text;
    std::optional<double> tau;
};

QoiSpec parse_qoi_flag(const std::string& spec, bool tau_required) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::runtime_error("QoI spec '" + spec + "' must look like name=expr" +
                                 (tau_required ? "@tau" : ""));
    QoiSpec out;
    out.name = spec.substr(0, eq);
    std::string rest = spec.substr(eq + 1);
    const std::size_t at = rest.rfind('@');
    if (at != std::string::npos) {
        const std::string tau_text = rest.substr(at + 1);
        std::size_t used = 0;
        double tau = 0.0;
        try {
            tau = std::stod(tau_text, &used);
        } catch (const std::exception&) {
            throw std::runtime_error("QoI spec '" + spec + "': cannot parse tolerance '" +
                                     tau_text + "'");
        }
        if (used != tau_text.size() || !(tau > 0.0) || !std::isfinite(tau))
            throw std::runtime_error("QoI spec '" + spec +
                                     "': tolerance must be a positive finite number");
        out.tau = tau;
        rest = rest.substr(0, at);
    } else if (tau_required) {
        throw std::runtime_error("QoI spec '" + spec + "' is missing '@tau'");
    }
    out.expr_text = rest;
    return out;
}

std::vector<double> parse_positive_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::runtime_error(std::string(what) + ": cannot parse '" + item + "'");
        }
        if (used != item.size() || !(v > 0.0) || !std::isfinite(v))
            throw std::runtime_error(std::string(what) + ": '" + item +
                                     "' is not a positive finite number");
        out.push_back(v);
    }
    if (out.empty())
        throw std::runtime_error(std::string(what) + ": empty list");
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] < out[i - 1]))
            throw std::runtime_error(std::string(what) + ": values must strictly decrease");
    return out;
}

// "1e-1..1e-10" (decade ladder) or a comma list of decreasing tolerances.
std::vector<double> parse_ladder(const std::string& text) {
    const std::size_t dots = text.find("..");
    if (dots != std::string::npos) {
        const double hi = std::stod(text.substr(0, dots));
        const double lo = std::stod(text.substr(dots + 2));
        if (!(hi > lo) || !(lo > 0.0))
            throw std::runtime_error("ladder range must run from a larger to a smaller "
                                     "positive tolerance");
        const int e_hi = static_cast<int>(std::llround(std::log10(hi)));
        const int e_lo = static_cast<int>(std::llround(std::log10(lo)));
        if (std::pow(10.0, e_hi) != hi || std::pow(10.0, e_lo) != lo)
            throw std::runtime_error("ladder range endpoints must be powers of ten, e.g. "
                                     "1e-1..1e-10");
        std::vector<double> out;
        for (int e = e_hi; e >= e_lo; --e)
            out.push_back(std::pow(10.0, e));
        return out;
    }
    return parse_positive_list(text, "ladder");
}

std::vector<double> default_schedule() {
    std::vector<double> out;
    for (int i = 0; i <= 19; ++i)
        out.push_back(0.1 * std::ldexp(1.0, -i));
    return out;
}

std::vector<double> parse_schedule(const std::string& text) {
    if (text.empty() || text == "default")
        return default_schedule();
    return parse_positive_list(text, "schedule");
}

std::string codec_kind_for_flag(const std::string& flag) {
    if (flag == "bitplane")
        return "bitplane";
    if (flag == "snapshot")
        return "snapshot-independent";
    if (flag == "delta")
        return "snapshot-delta";
    throw std::runtime_error("unknown codec '" + flag + "'");
}

std::string var_name_from_path(const std::string& path) {
    std::string stem = fs::path(path).stem().string();
    if (stem.empty())
        throw std::runtime_error("cannot derive a variable name from '" + path +
                                 "'; pass --var");
    return stem;
}

void print_report(const RetrievalReport& report) {
    std::printf("%-16s %12s %14s %14s  %s\n", "qoi", "tolerance", "estimated",
                "denominator", "satisfied");
    for (const QoiOutcome& q : report.qois)
        std::printf("%-16s %12.5g %14.6g %14.6g  %s\n", q.name.c_str(), q.tolerance,
                    q.estimate, q.denominator, q.satisfied ? "yes" : "NO");
    std::printf("\n%-16s %14s %12s %12s  %s\n", "variable", "eps", "bytes", "bits/value",
                "full-fidelity");
    for (const VariableOutcome& v : report.variables) {
        if (!v.involved) {
            std::printf("%-16s %14s %12s %12s  %s\n", v.name.c_str(), "-", "0", "-",
                        "(not involved)");
            continue;
        }
        std::printf("%-16s %14.6g %12llu %12.3f  %s\n", v.name.c_str(), v.eps,
                    static_cast<unsigned long long>(v.bytes), v.bits_per_value,
                    v.full_fidelity ? "yes" : "no");
    }
    std::printf("\n%s after %u iteration%s, %llu bytes retrieved (%s tolerances)\n",
                report.satisfied ? "satisfied" : "NOT satisfied", report.iterations,
                report.iterations == 1 ? "" : "s",
                static_cast<unsigned long long>(report.total_bytes),
                report.absolute ? "absolute" : "relative");
}

// ---- synth ----------------------------------------------------------------

int cmd_synth(const std::string& kind, std::uint64_t n, std::uint64_t seed,
              const std::string& out_dir, double patch_fraction) {
    const auto fields = synthesize(kind, static_cast<std::size_t>(n), seed, patch_fraction);
    fs::create_directories(out_dir);
    for (const SynthField& f : fields) {
        const fs::path path = fs::path(out_dir) / (f.name + ".f64");
        write_raw_array(path.string(), f.values);
        std::printf("wrote %s (%zu elements)\n", path.string().c_str(), f.values.size());
    }
    return kExitOk;
}

// ---- refactor --------------------------------------------------------------

int cmd_refactor(const std::vector<std::string>& inputs, std::vector<std::string> var_names,
                 const std::string& codec_flag, const std::string& ladder_text,
                 bool mask_zeros, const std::string& out_dir) {
    if (!var_names.empty() && var_names.size() != inputs.size())
        throw std::runtime_error("--var count (" + std::to_string(var_names.size()) +
                                 ") must match --input count (" +
                                 std::to_string(inputs.size()) + ")");

    CodecConfig config;
    config.kind = codec_kind_for_flag(codec_flag);
    if (!ladder_text.empty())
        config.snapshot_ladder = parse_ladder(ladder_text);

    std::vector<InputSpec> specs;
    std::vector<VariableData> vars;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        InputSpec spec = parse_input_spec(inputs[i]);
        const std::string name =
            var_names.empty() ? var_name_from_path(spec.path) : var_names[i];
        vars.push_back(ingest_variable(name, spec, infer_width_bytes(spec.path)));
        specs.push_back(std::move(spec));
    }

    OutlierMask mask;
    const OutlierMask* mask_ptr = nullptr;
    if (mask_zeros) {
        for (const VariableData& v : vars)
            if (v.size() != vars.front().size())
                throw std::runtime_error("--mask-zeros needs equal-length variables");
        mask = build_mask(std::span<const VariableData>(vars));
        mask_ptr = &mask;
        std::printf("mask covers %zu of %zu points\n", mask.count(), mask.size());
    }

    std::vector<RefactoredVariable> refactored;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        RefactoredVariable rv = refactor_variable(vars[i], mask_ptr, config);
        if (!specs[i].dims.empty())
            rv.record.dims = specs[i].dims;
        refactored.push_back(std::move(rv));
    }
    write_store(out_dir, refactored);

    for (const RefactoredVariable& rv : refactored) {
        std::uint64_t payload = 0;
        for (const SegmentMeta& s : rv.record.segments)
            payload += s.byte_size;
        std::printf("%-16s codec=%s  %u segments  %llu payload bytes  (%llu raw)\n",
                    rv.record.name.c_str(), rv.record.codec.c_str(),
                    static_cast<unsigned>(rv.record.segments.size()),
                    static_cast<unsigned long long>(payload),
                    static_cast<unsigned long long>(rv.record.count * 8));
    }
    std::printf("store written to %s\n", out_dir.c_str());
    return kExitOk;
}

// ---- retrieve --------------------------------------------------------------

std::vector<std::string> store_var_names(const SegmentStore& store) {
    std::vector<std::string> names;
    for (const VarRecord& rec : store.variables())
        names.push_back(rec.name);
    return names;
}

int cmd_retrieve(const std::string& store_dir, const std::vector<std::string>& qoi_flags,
                 bool absolute, const std::string& trace_path,
                 const std::string& report_path, const std::string& dump_dir) {
    const SegmentStore store = SegmentStore::open(store_dir);
    const std::vector<std::string> names = store_var_names(store);

    std::vector<QoiRequest> requests;
    for (const std::string& flag : qoi_flags) {
        QoiSpec spec = parse_qoi_flag(flag, /*tau_required=*/true);
        requests.push_back(
            {spec.name, resolve_expr(spec.expr_text, names, spec.name), *spec.tau});
    }

    std::ofstream trace;
    RetrieveOptions opts;
    opts.absolute = absolute;
    if (!trace_path.empty()) {
        trace.open(trace_path, std::ios::trunc);
        if (!trace)
            throw std::runtime_error("cannot open trace file '" + trace_path + "'");
        trace << std::setprecision(17);
        opts.trace = &trace;
    }

    RetrievalSession session(store);
    const RetrievalReport report = session.retrieve(requests, opts);
    print_report(report);

    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open report file '" + report_path + "'");
        out << report.to_json() << "\n";
    }
    if (!dump_dir.empty()) {
        fs::create_directories(dump_dir);
        for (const std::string& name : names) {
            const RetrievalState& st = session.state(name);
            write_raw_array((fs::path(dump_dir) / (name + ".f64")).string(), st.values);
        }
        std::printf("reconstructions written to %s\n", dump_dir.c_str());
    }
    return report.satisfied ? kExitOk : kExitUnsatisfied;
}

// ---- sweep -----------------------------------------------------------------

int cmd_sweep(const std::string& store_dir, const std::vector<std::string>& qoi_flags,
              const std::string& schedule_text, const std::string& out_csv,
              const std::vector<std::string>& original_flags, bool absolute) {
    const SegmentStore store = SegmentStore::open(store_dir);
    const std::vector<std::string> names = store_var_names(store);
    const std::vector<double> schedule = parse_schedule(schedule_text);

    struct SweepQoi {
        std::string name;
        QoiExprPtr expr;
        std::vector<std::size_t> involved;
        std::vector<double> true_values; // empty without originals
        double true_range = 0.0;
    };
    std::vector<SweepQoi> qois;
    for (const std::string& flag : qoi_flags) {
        QoiSpec spec = parse_qoi_flag(flag, /*tau_required=*/false);
        SweepQoi q;
        q.name = spec.name;
        q.expr = resolve_expr(spec.expr_text, names, spec.name);
        std::set<std::size_t> used;
        collect_used_vars(*q.expr, used);
        q.involved.assign(used.begin(), used.end());
        qois.push_back(std::move(q));
    }

    // Originals enable the measured ("actual") error column and pin the
    // relative-error denominators to the true value ranges.
    std::map<std::string, std::vector<double>> originals;
    for (const std::string& flag : original_flags) {
        const std::size_t eq = flag.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::runtime_error("--original needs NAME=PATH[:dims], got '" + flag + "'");
        const std::string name = flag.substr(0, eq);
        if (!store.has_variable(name))
            throw std::runtime_error("--original names unknown variable '" + name + "'");
        const InputSpec spec = parse_input_spec(flag.substr(eq + 1));
        std::vector<double> values = read_raw_array(spec, infer_width_bytes(spec.path));
        if (values.size() != store.variable(name).count)
            throw std::runtime_error("--original '" + name + "' holds " +
                                     std::to_string(values.size()) + " elements, store has " +
                                     std::to_string(store.variable(name).count));
        originals[name] = std::move(values);
    }

    std::map<std::string, double> true_ranges;
    for (SweepQoi& q : qois) {
        const bool have_all = std::all_of(q.involved.begin(), q.involved.end(),
                                          [&](std::size_t v) {
                                              return originals.count(names[v]) != 0;
                                          });
        if (!have_all || q.involved.empty())
            continue;
        const std::size_t n = originals[names[q.involved.front()]].size();
        std::vector<double> point(names.size(), 0.0);
        q.true_values.resize(n);
        double lo = 0.0, hi = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t v : q.involved)
                point[v] = originals[names[v]][j];
            const double val = eval(*q.expr, point);
            q.true_values[j] = val;
            lo = j == 0 ? val : std::min(lo, val);
            hi = j == 0 ? val : std::max(hi, val);
        }
        q.true_range = hi - lo;
        if (q.true_range > 0.0)
            true_ranges[q.name] = q.true_range;
    }

    std::uint64_t original_bytes = 0;
    {
        std::set<std::size_t> involved_union;
        for (const SweepQoi& q : qois)
            involved_union.insert(q.involved.begin(), q.involved.end());
        for (std::size_t v : involved_union)
            original_bytes += store.variables()[v].count * 8;
    }

    std::ofstream csv(out_csv, std::ios::trunc);
    if (!csv)
        throw std::runtime_error("cannot open output CSV '" + out_csv + "'");
    csv << std::setprecision(17);
    csv << "codec,qoi,requested_tau,max_estimated,max_actual,bitrate,bytes,iterations,"
           "satisfied,reduction_factor\n";

    RetrievalSession session(store);
    RetrieveOptions opts;
    opts.absolute = absolute;
    opts.qoi_value_ranges = &true_ranges;

    bool all_satisfied = true;
    std::vector<double> point(names.size(), 0.0);
    for (const double tau : schedule) {
        std::vector<QoiRequest> requests;
        for (const SweepQoi& q : qois)
            requests.push_back({q.name, q.expr, tau});
        const RetrievalReport report = session.retrieve(requests, opts);
        all_satisfied = all_satisfied && report.satisfied;

        for (std::size_t k = 0; k < qois.size(); ++k) {
            const SweepQoi& q = qois[k];

            std::string codec;
            for (std::size_t v : q.involved) {
                const std::string& kind = store.variables()[v].codec;
                if (codec.find(kind) == std::string::npos)
                    codec += (codec.empty() ? "" : "+") + kind;
            }
            if (codec.empty())
                codec = "none";

            std::string actual_text;
            if (!q.true_values.empty()) {
                double max_abs = 0.0;
                const std::size_t n = q.true_values.size();
                std::vector<const std::vector<double>*> recon;
                for (std::size_t v : q.involved)
                    recon.push_back(&session.state(names[v]).values);
                for (std::size_t j = 0; j < n; ++j) {
                    for (std::size_t i = 0; i < q.involved.size(); ++i)
                        point[q.involved[i]] = (*recon[i])[j];
                    max_abs = std::max(max_abs,
                                       std::abs(eval(*q.expr, point) - q.true_values[j]));
                }
                const double denom = absolute || q.true_range <= 0.0 ? 1.0 : q.true_range;
                std::ostringstream tmp;
                tmp << std::setprecision(17) << max_abs / denom;
                actual_text = tmp.str();
            }

            std::size_t n_e = 0;
            for (std::size_t v : q.involved)
                n_e = std::max(n_e, static_cast<std::size_t>(store.variables()[v].count));
            const double bitrate =
                n_e == 0 ? 0.0
                         : 8.0 * static_cast<double>(report.total_bytes) /
                               static_cast<double>(n_e);

            const QoiOutcome& out = report.qois[k];
            csv << codec << "," << q.name << "," << tau << "," << out.estimate << ","
                << actual_text << "," << bitrate << "," << report.total_bytes << ","
                << report.iterations << "," << (report.satisfied ? 1 : 0) << ",";
            if (report.satisfied && report.total_bytes > 0)
                csv << static_cast<double>(original_bytes) /
                           static_cast<double>(report.total_bytes);
            csv << "\n";
        }
    }
    std::printf("sweep CSV written to %s (%zu rungs, %zu QoIs)%s\n", out_csv.c_str(),
                schedule.size(), qois.size(),
                all_satisfied ? "" : " — some rungs unsatisfied");
    return all_satisfied ? kExitOk : kExitUnsatisfied;
}

// ---- qoi-check -------------------------------------------------------------

int cmd_qoi_check(std::uint64_t trials, std::uint64_t seed) {
    constexpr double kGasConstant = 287.1;
    constexpr double kGamma = 1.4;
    constexpr double kMuRef = 1.716e-5;
    constexpr double kTRef = 273.15;
    constexpr double kSutherland = 110.4;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> vel(-500.0, 500.0);
    std::uniform_real_distribution<double> pres(1e4, 1e6);
    std::uniform_real_distribution<double> dens(0.1, 5.0);

    const auto qois = builtin_qois();
    std::vector<double> worst(qois.size(), 0.0);

    for (std::uint64_t t = 0; t < trials; ++t) {
        const double vx = vel(rng), vy = vel(rng), vz = vel(rng);
        const double p = pres(rng), d = dens(rng);
        const double values[5] = {vx, vy, vz, p, d};

        const double vtot = std::sqrt(vx * vx + vy * vy + vz * vz);
        const double temp = p / (d * kGasConstant);
        const double sound = std::sqrt(kGamma * kGasConstant * temp);
        const double mach = vtot / sound;
        const double ptot = p * std::pow(1.0 + 0.5 * (kGamma - 1.0) * mach * mach,
                                         kGamma / (kGamma - 1.0));
        const double visc = kMuRef * std::pow(temp / kTRef, 1.5) * (kTRef + kSutherland) /
                            (temp + kSutherland);
        const double expected[6] = {vtot, temp, sound, mach, ptot, visc};

        for (std::size_t k = 0; k < qois.size(); ++k) {
            const double got = eval(*qois[k].second, values);
            const double denom = std::max(std::abs(expected[k]), 1e-300);
            worst[k] = std::max(worst[k], std::abs(got - expected[k]) / denom);
        }
    }

    double overall = 0.0;
    for (std::size_t k = 0; k < qois.size(); ++k) {
        std::printf("%-6s max relative deviation %.3e over %llu states\n",
                    qois[k].first.c_str(), worst[k],
                    static_cast<unsigned long long>(trials));
        overall = std::max(overall, worst[k]);
    }
    const bool ok = overall <= 1e-12;
    std::printf("overall max relative deviation %.3e — %s\n", overall,
                ok ? "within 1e-12" : "EXCEEDS 1e-12");
    return ok ? kExitOk : kExitUnsatisfied;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"progressive multi-precision refactoring with certified "
                 "derived-quantity error control"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate deterministic test fields");
    std::string synth_kind, synth_out;
    std::uint64_t synth_n = 0, synth_seed = 1;
    double synth_patch = 0.1;
    synth->add_option("--kind", synth_kind, "sinusoid-mix | smoothed-noise | zero-patch-velocity")
        ->required();
    synth->add_option("--n", synth_n, "elements per field (>= 2)")->required();
    synth->add_option("--seed", synth_seed, "RNG seed (default 1)");
    synth->add_option("--out", synth_out, "output directory for <name>.f64 files")->required();
    synth->add_option("--patch-fraction", synth_patch,
                      "zero-patch-velocity: fraction of points zeroed (default 0.1)");

    // refactor
    auto* refactor = app.add_subcommand("refactor", "build a progressive segment store");
    std::vector<std::string> rf_inputs, rf_vars;
    std::string rf_codec = "bitplane", rf_ladder, rf_out;
    bool rf_mask_zeros = false;
    refactor->add_option("--input", rf_inputs, "raw array path[:dims]; .f32 reads binary32")
        ->required();
    refactor->add_option("--var", rf_vars, "variable names (default: file stems)");
    refactor->add_option("--codec", rf_codec, "bitplane | snapshot | delta")
        ->check(CLI::IsMember({"bitplane", "snapshot", "delta"}));
    refactor->add_option("--ladder", rf_ladder,
                         "snapshot tolerance ladder: 1e-1..1e-10 or a comma list");
    refactor->add_flag("--mask-zeros", rf_mask_zeros,
                       "mask points where every input variable is exactly 0");
    refactor->add_option("--out", rf_out, "store directory to create")->required();

    // retrieve
    auto* retrieve = app.add_subcommand("retrieve", "retrieve to meet QoI tolerances");
    std::string rt_store, rt_trace, rt_report, rt_dump;
    std::vector<std::string> rt_qois;
    bool rt_absolute = false;
    retrieve->add_option("--store", rt_store, "store directory")->required();
    retrieve->add_option("--qoi", rt_qois, "QoI spec name=expr@tau (expr may name a builtin)")
        ->required();
    retrieve->add_flag("--absolute", rt_absolute, "tolerances are absolute, not relative");
    retrieve->add_option("--trace", rt_trace, "write per-iteration CSV trace here");
    retrieve->add_option("--report", rt_report, "write the JSON report here");
    retrieve->add_option("--dump", rt_dump, "write reconstructed arrays (binary64) here");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "tolerance sweep producing a CSV");
    std::string sw_store, sw_schedule, sw_out;
    std::vector<std::string> sw_qois, sw_originals;
    bool sw_absolute = false;
    sweep->add_option("--store", sw_store, "store directory")->required();
    sweep->add_option("--qoi", sw_qois, "QoI spec name=expr (any @tau suffix is ignored)")
        ->required();
    sweep->add_option("--schedule", sw_schedule,
                      "'default' (0.1*2^-i, i=0..19) or a comma list of decreasing taus");
    sweep->add_option("--out", sw_out, "output CSV path")->required();
    sweep->add_option("--original", sw_originals,
                      "NAME=PATH[:dims] original arrays; enables the max_actual column");
    sweep->add_flag("--absolute", sw_absolute, "tolerances are absolute, not relative");

    // qoi-check
    auto* qoi_check =
        app.add_subcommand("qoi-check", "verify builtin quantities against closed forms");
    std::uint64_t qc_trials = 10000, qc_seed = 1;
    qoi_check->add_option("--trials", qc_trials, "random states to test (default 10000)");
    qoi_check->add_option("--seed", qc_seed, "RNG seed (default 1)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(synth_kind, synth_n, synth_seed, synth_out, synth_patch);
        if (refactor->parsed())
            return cmd_refactor(rf_inputs, rf_vars, rf_codec, rf_ladder, rf_mask_zeros, rf_out);
        if (retrieve->parsed())
            return cmd_retrieve(rt_store, rt_qois, rt_absolute, rt_trace, rt_report, rt_dump);
        if (sweep->parsed())
            return cmd_sweep(sw_store, sw_qois, sw_schedule, sw_out, sw_originals, sw_absolute);
        if (qoi_check->parsed())
            return cmd_qoi_check(qc_trials, qc_seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
