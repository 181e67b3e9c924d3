// Acceptance gate: ten pinned system-level criteria, each printed as one
// [PASS]/[FAIL] line. The process exit status is the number of failures.
//
// Tolerances are pinned here, in code:
//   - tightness witnesses and builtin fidelity: 1e-12 relative
//   - measured-vs-certified comparisons allow 1e-12 relative measurement
//     rounding (the certified side always dominates the true error; the
//     measured side is itself computed in floating point)
//   - perturbation fuzz allows bound + 1e-12 * (1 + |value|) evaluation noise
//   - incremental-vs-one-shot byte totals must agree within 1 percent

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "oracle.hpp"
#include "proqoi/bounds.hpp"
#include "proqoi/builtins.hpp"
#include "proqoi/codec.hpp"
#include "proqoi/expr.hpp"
#include "proqoi/hb_transform.hpp"
#include "proqoi/ingest.hpp"
#include "proqoi/parser.hpp"
#include "proqoi/propagate.hpp"
#include "proqoi/retriever.hpp"
#include "proqoi/store.hpp"
#include "proqoi/synth.hpp"
#include "proqoi/variable.hpp"

using namespace proqoi;

namespace {

constexpr double kWitnessRelTol = 1e-12;
constexpr double kBuiltinRelTol = 1e-12;
constexpr double kMeasureSlack = 1e-12; // relative, on measured-vs-certified
constexpr double kByteAgreement = 0.01; // incremental vs one-shot

struct Outcome {
    bool ok = false;
    std::string detail;
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
    va_list args;
    va_start(args, pattern);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

std::vector<double> wave(std::size_t n, double offset, double scale, double f1, double f2) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n);
        v[i] = offset + scale * (std::sin(2.0 * std::numbers::pi * f1 * t) +
                                 0.35 * std::cos(2.0 * std::numbers::pi * f2 * t));
    }
    return v;
}

// ---- criterion 1: certified bounds dominate brute-force sups ----------------

Outcome criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> xd(-10.0, 10.0);
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    long violations = 0;
    constexpr int kCases = 1000;

    // integer power
    for (int t = 0; t < kCases; ++t) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const double x = xd(rng);
        const double e = 0.001 + 2.999 * frac(rng);
        if (static_cast<long double>(bound_power(n, x, ErrorBound(e)).value()) <
            oracle::sup_power(n, x, e))
            ++violations;
    }
    // square root
    for (int t = 0; t < kCases; ++t) {
        const double x = t % 20 == 0 ? 0.0 : std::fabs(xd(rng)) * 2.0;
        const double e = 0.001 + 4.999 * frac(rng);
        if (static_cast<long double>(bound_sqrt(x, ErrorBound(e)).value()) <
            oracle::sup_sqrt(x, e))
            ++violations;
    }
    // reciprocal shift 1/(x + c)
    for (int t = 0; t < kCases; ++t) {
        double s = xd(rng);
        while (std::fabs(s) < 1e-3)
            s = xd(rng);
        const double c = 0.5 * xd(rng);
        const double x = s - c;
        const double e = frac(rng) * std::fabs(x + c);
        const ErrorBound b = bound_radical(c, x, ErrorBound(e));
        if (b.is_unbounded())
            continue; // conservatively refusing a certificate is always sound
        if (static_cast<long double>(b.value()) < oracle::sup_radical(c, x, e))
            ++violations;
    }
    // weighted sum (exact corner oracle)
    for (int t = 0; t < kCases; ++t) {
        const std::size_t k = 1 + rng() % 5;
        std::vector<double> w(k), e(k);
        std::vector<ErrorBound> eb;
        for (std::size_t i = 0; i < k; ++i) {
            w[i] = 0.6 * xd(rng);
            e[i] = std::fabs(xd(rng)) * 0.2;
            eb.emplace_back(e[i]);
        }
        if (static_cast<long double>(bound_weighted_sum(w, eb).value()) <
            oracle::sup_weighted_sum(w, e))
            ++violations;
    }
    // product
    for (int t = 0; t < kCases; ++t) {
        const double x1 = xd(rng), x2 = xd(rng);
        const double e1 = 0.001 + 1.999 * frac(rng), e2 = 0.001 + 1.999 * frac(rng);
        if (static_cast<long double>(
                bound_product(x1, ErrorBound(e1), x2, ErrorBound(e2)).value()) <
            oracle::sup_product(x1, e1, x2, e2))
            ++violations;
    }
    // quotient
    for (int t = 0; t < kCases; ++t) {
        const double x1 = xd(rng);
        const double e1 = 0.001 + 1.999 * frac(rng);
        double x2 = xd(rng);
        while (std::fabs(x2) < 0.5)
            x2 = xd(rng);
        const double e2 = 0.9 * frac(rng) * std::fabs(x2);
        const ErrorBound b = bound_quotient(x1, ErrorBound(e1), x2, ErrorBound(e2));
        if (b.is_unbounded())
            continue;
        if (static_cast<long double>(b.value()) < oracle::sup_quotient(x1, e1, x2, e2))
            ++violations;
    }

    const double dt = elapsed_s(t0);
    return {violations == 0 && dt < 60.0,
            fmt("6 x %d randomized cases vs dense-grid sup oracles, %ld violations, %.1fs",
                kCases, violations, dt)};
}

// ---- criterion 2: tightness witnesses ---------------------------------------

Outcome criterion2() {
    struct Witness {
        const char* label;
        double bound;
        long double sup;
    };
    const Witness ws[] = {
        {"power(n=2,x=3,e=0.1)", bound_power(2, 3.0, ErrorBound(0.1)).value(),
         oracle::sup_power(2, 3.0, 0.1)},
        {"sqrt(x=4,e=1)", bound_sqrt(4.0, ErrorBound(1.0)).value(), oracle::sup_sqrt(4.0, 1.0)},
        {"recip(c=1,x=1,e=0.5)", bound_radical(1.0, 1.0, ErrorBound(0.5)).value(),
         oracle::sup_radical(1.0, 1.0, 0.5)},
        {"quotient(1,0.1,2,0.1)",
         bound_quotient(1.0, ErrorBound(0.1), 2.0, ErrorBound(0.1)).value(),
         oracle::sup_quotient(1.0, 0.1, 2.0, 0.1)},
    };
    long double worst = 0.0L;
    bool dominated = true;
    for (const Witness& w : ws) {
        const long double rel =
            std::fabs(static_cast<long double>(w.bound) - w.sup) / w.sup;
        worst = std::max(worst, rel);
        dominated = dominated && static_cast<long double>(w.bound) >= w.sup;
    }
    return {dominated && worst <= static_cast<long double>(kWitnessRelTol),
            fmt("4 exact witnesses, worst relative gap %.3Le (tol %.0e)", worst,
                kWitnessRelTol)};
}

// ---- criterion 3: composition soundness under perturbation fuzzing ----------

Outcome criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr int kTrees = 500;
    constexpr int kDraws = 100000;
    std::mt19937_64 draw_rng(31337);
    std::uniform_real_distribution<double> xd(-3.0, 3.0);
    std::uniform_real_distribution<double> rd(0.0, 0.3);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);

    long tested = 0, skipped = 0, violations = 0;
    long long draws_total = 0;

    for (int i = 0; i < kTrees; ++i) {
        const std::size_t nvars = 1 + static_cast<std::size_t>(i % 4);
        oracle::TreeGen gen(1000 + static_cast<std::uint64_t>(i), nvars);
        const QoiExprPtr expr = gen.gen(1 + i % 5);

        std::vector<double> x(nvars), radius(nvars);
        std::vector<ErrorBound> eb;
        std::optional<Propagated> prop;
        for (int attempt = 0; attempt < 25 && !prop; ++attempt) {
            eb.clear();
            for (std::size_t v = 0; v < nvars; ++v) {
                x[v] = xd(draw_rng);
                radius[v] = rd(draw_rng);
                eb.emplace_back(radius[v]);
            }
            try {
                Propagated p = propagate(*expr, PointContext{x, eb});
                if (p.bound.is_finite() && std::isfinite(p.value))
                    prop = p;
            } catch (const std::domain_error&) {
            }
        }
        if (!prop) {
            ++skipped;
            continue;
        }
        ++tested;
        const double allow =
            prop->bound.value() + 1e-12 * (1.0 + std::fabs(prop->value));

        std::vector<double> xp(nvars);
        for (int d = 0; d < kDraws; ++d) {
            for (std::size_t v = 0; v < nvars; ++v)
                xp[v] = x[v] + radius[v] * ud(draw_rng);
            ++draws_total;
            double val;
            try {
                val = eval(*expr, xp);
            } catch (const std::exception&) {
                ++violations; // a finite certificate promises a pole-free box
                break;
            }
            if (std::fabs(val - prop->value) > allow) {
                ++violations;
                break;
            }
        }
    }

    const double dt = elapsed_s(t0);
    return {violations == 0 && tested >= 450 && dt < 300.0,
            fmt("%ld trees x %d in-box draws (%lld total, %ld skipped as certified-"
                "unbounded), %ld violations, %.1fs",
                tested, kDraws, draws_total, skipped, violations, dt)};
}

// ---- criterion 4: per-prefix conformance and the lossless threshold ---------

// Independent recomputation of the deepest-precision error level the bitplane
// pipeline can promise: L * 2^(m_max - 52) * U, with L the level count, m_max
// the widest per-level coefficient bit width, and U the lattice unit.
double bitplane_lossless_threshold(const VariableData& var) {
    const double mid = (var.vmin + var.vmax) / 2.0;
    double maxabs = 0.0;
    for (double v : var.values)
        maxabs = std::max(maxabs, std::fabs(v - mid));
    int e = 0;
    std::frexp(maxabs, &e);
    const int unit_exp = e - 56;

    std::vector<std::int64_t> lattice(var.size());
    for (std::size_t i = 0; i < lattice.size(); ++i)
        lattice[i] = std::llround(std::ldexp(var.values[i] - mid, -unit_exp));
    const HbLayout layout(var.size());
    hb_forward(std::span<std::int64_t>(lattice), layout);

    int m_max = 0;
    for (int l = 0; l <= layout.depth; ++l) {
        std::uint64_t maxmag = 0;
        layout.for_each_node(l, [&](std::size_t idx) {
            const std::uint64_t mag = lattice[idx] < 0
                                          ? static_cast<std::uint64_t>(-lattice[idx])
                                          : static_cast<std::uint64_t>(lattice[idx]);
            maxmag = std::max(maxmag, mag);
        });
        m_max = std::max(m_max, static_cast<int>(std::bit_width(maxmag)));
    }
    return static_cast<double>(layout.depth + 1) * std::ldexp(1.0, m_max - 52) *
           std::ldexp(1.0, unit_exp);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

Outcome criterion4() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<VariableData> arrays;
    arrays.push_back(VariableData::from_values("a0", wave(257, 0.0, 1.0, 2.0, 9.0)));
    arrays.push_back(VariableData::from_values("a1", wave(1000, 0.0, 300.0, 3.0, 17.0)));
    arrays.push_back(
        VariableData::from_values("a2", synthesize("smoothed-noise", 3000, 40)[0].values));
    arrays.push_back(VariableData::from_values("a3", wave(4096, 0.0, 1e-3, 5.0, 23.0)));
    arrays.push_back(VariableData::from_values("a4", wave(10000, 0.0, 450.0, 2.0, 31.0)));
    arrays.push_back(
        VariableData::from_values("a5", synthesize("smoothed-noise", 33333, 41)[0].values));
    arrays.push_back(VariableData::from_values("a6", wave(65536, 1.0e5, 2.0e4, 4.0, 13.0)));
    arrays.push_back(VariableData::from_values("a7", wave(131072, 1.2, 0.5, 6.0, 19.0)));
    arrays.push_back(VariableData::from_values("a8", wave(400000, -50.0, 100.0, 3.0, 29.0)));
    arrays.push_back(VariableData::from_values("a9", wave(1000000, 0.0, 250.0, 2.0, 37.0)));

    const char* codecs[] = {"bitplane", "snapshot-delta", "snapshot-independent"};
    long prefixes_checked = 0, prefix_violations = 0, lossless_misses = 0;

    oracle::TempDir dir("acc-def1");
    int case_id = 0;
    for (const char* kind : codecs) {
        for (const VariableData& var : arrays) {
            std::vector<RefactoredVariable> rvs;
            rvs.push_back(refactor_variable(var, nullptr, CodecConfig{kind, {}}));
            const std::filesystem::path sub = dir.path / ("case" + std::to_string(case_id++));
            write_store(sub, rvs);
            const SegmentStore store = SegmentStore::open(sub);
            const VarRecord& rec = store.variable(var.name);

            RetrievalState st = init_state(store, rec);
            ++prefixes_checked;
            if (max_abs_diff(st.values, var.values) >
                rec.initial_bound() * (1.0 + kMeasureSlack))
                ++prefix_violations;

            for (const SegmentMeta& seg : rec.segments) {
                reconstruct_to(store, rec, st, seg.nominal_bound);
                ++prefixes_checked;
                if (max_abs_diff(st.values, var.values) >
                    seg.nominal_bound * (1.0 + kMeasureSlack) &&
                    seg.nominal_bound > 0.0)
                    ++prefix_violations;
                if (seg.nominal_bound == 0.0 && max_abs_diff(st.values, var.values) != 0.0)
                    ++prefix_violations;
            }

            // Full retrieval: everything the store holds.
            reconstruct_to(store, rec, st, 0.0);
            const double full = max_abs_diff(st.values, var.values);
            const double threshold = std::string(kind) == "bitplane"
                                         ? bitplane_lossless_threshold(var)
                                         : rec.floor_bound();
            if (full > threshold * (1.0 + kMeasureSlack))
                ++lossless_misses;
        }
    }

    const double dt = elapsed_s(t0);
    return {prefix_violations == 0 && lossless_misses == 0,
            fmt("3 codecs x 10 arrays (up to 1e6 elements), %ld prefixes honored their "
                "nominal bounds, %ld violations, %ld lossless-threshold misses, %.1fs",
                prefixes_checked, prefix_violations, lossless_misses, dt)};
}

// ---- shared sweep context for criteria 5, 6, 7, 10 ---------------------------

struct SweepResult {
    long rows = 0;
    long satisfied_rows = 0;
    long exceptions = 0; // satisfied row with actual > estimate or estimate > tau
    bool all_satisfied = true;
    std::uint64_t cumulative_bytes = 0;
    std::uint32_t last_iterations = 0;
};

struct SweepContext {
    oracle::TempDir dir{"acc-sweep"};
    std::size_t n = 20000;
    std::vector<VariableData> vars;
    std::vector<std::string> names{"Vx", "Vy", "Vz", "P", "D"};
    std::vector<std::pair<std::string, QoiExprPtr>> qois;
    std::map<std::string, std::vector<double>> truth;
    std::map<std::string, double> ranges;
    std::vector<double> schedule;

    std::optional<SegmentStore> bitplane, delta, independent;
    SweepResult bitplane_sweep, delta_sweep, independent_sweep;
    std::uint64_t bitplane_oneshot = 0, delta_oneshot = 0;

    SweepContext() {
        vars.push_back(VariableData::from_values("Vx", wave(n, 0.0, 220.0, 3.0, 19.0)));
        vars.push_back(VariableData::from_values("Vy", wave(n, 0.0, 160.0, 5.0, 23.0)));
        vars.push_back(VariableData::from_values("Vz", wave(n, 0.0, 90.0, 7.0, 29.0)));
        vars.push_back(VariableData::from_values("P", wave(n, 1.0e5, 2.0e4, 4.0, 13.0)));
        vars.push_back(VariableData::from_values("D", wave(n, 1.2, 0.4, 6.0, 17.0)));

        qois.emplace_back("VTOT", parse_qoi("sqrt(Vx^2 + Vy^2 + Vz^2)", names));
        qois.emplace_back("TA", parse_qoi("P / (D * 287.1)", names));
        qois.emplace_back("PROD", parse_qoi("P * D", names));
        qois.emplace_back("QUOT", parse_qoi("Vx / D", names));

        std::vector<double> point(names.size());
        for (const auto& [qname, expr] : qois) {
            std::vector<double>& tv = truth[qname];
            tv.resize(n);
            double lo = 0.0, hi = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t v = 0; v < names.size(); ++v)
                    point[v] = vars[v].values[j];
                tv[j] = eval(*expr, point);
                lo = j == 0 ? tv[j] : std::min(lo, tv[j]);
                hi = j == 0 ? tv[j] : std::max(hi, tv[j]);
            }
            ranges[qname] = hi - lo;
        }
        for (int i = 0; i <= 19; ++i)
            schedule.push_back(0.1 * std::ldexp(1.0, -i));

        bitplane.emplace(build("bitplane"));
        delta.emplace(build("snapshot-delta"));
        independent.emplace(build("snapshot-independent"));

        bitplane_sweep = run_sweep(*bitplane);
        delta_sweep = run_sweep(*delta);
        independent_sweep = run_sweep(*independent);
        bitplane_oneshot = run_oneshot(*bitplane);
        delta_oneshot = run_oneshot(*delta);
    }

    SegmentStore build(const char* kind) {
        std::vector<RefactoredVariable> rvs;
        for (const VariableData& v : vars)
            rvs.push_back(refactor_variable(v, nullptr, CodecConfig{kind, {}}));
        const std::filesystem::path sub = dir.path / kind;
        write_store(sub, rvs);
        return SegmentStore::open(sub);
    }

    std::vector<QoiRequest> requests_at(double tau) const {
        std::vector<QoiRequest> out;
        for (const auto& [qname, expr] : qois)
            out.push_back(QoiRequest{qname, expr, tau});
        return out;
    }

    SweepResult run_sweep(const SegmentStore& store) {
        RetrievalSession session(store);
        RetrieveOptions opts;
        opts.qoi_value_ranges = &ranges;

        SweepResult r;
        std::vector<double> point(names.size());
        for (const double tau : schedule) {
            const RetrievalReport report = session.retrieve(requests_at(tau), opts);
            r.all_satisfied = r.all_satisfied && report.satisfied;
            r.last_iterations = report.iterations;

            std::vector<const std::vector<double>*> recon;
            for (const std::string& name : names)
                recon.push_back(&session.state(name).values);

            for (std::size_t k = 0; k < qois.size(); ++k) {
                ++r.rows;
                if (!report.qois[k].satisfied)
                    continue;
                ++r.satisfied_rows;
                const auto& [qname, expr] = qois[k];
                const std::vector<double>& tv = truth[qname];
                double actual_abs = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    for (std::size_t v = 0; v < names.size(); ++v)
                        point[v] = (*recon[v])[j];
                    actual_abs = std::max(actual_abs, std::fabs(eval(*expr, point) - tv[j]));
                }
                const double actual_rel = actual_abs / ranges[qname];
                const double est = report.qois[k].estimate;
                if (!(actual_rel <= est * (1.0 + kMeasureSlack) && est <= tau))
                    ++r.exceptions;
            }
        }
        r.cumulative_bytes = session.total_bytes();
        return r;
    }

    std::uint64_t run_oneshot(const SegmentStore& store) {
        RetrievalSession session(store);
        RetrieveOptions opts;
        opts.qoi_value_ranges = &ranges;
        (void)session.retrieve(requests_at(schedule.back()), opts);
        return session.total_bytes();
    }
};

SweepContext& sweep_context() {
    static SweepContext ctx;
    return ctx;
}

Outcome criterion5() {
    const SweepContext& ctx = sweep_context();
    const SweepResult& r = ctx.bitplane_sweep;
    return {r.exceptions == 0 && r.satisfied_rows == r.rows && r.all_satisfied,
            fmt("20-rung sweep x 4 QoIs on 5 fields (n=%zu): %ld/%ld rows satisfied with "
                "max_actual <= max_estimated <= tau, %ld exceptions",
                ctx.n, r.satisfied_rows, r.rows, r.exceptions)};
}

Outcome criterion6() {
    const SweepContext& ctx = sweep_context();
    const std::uint64_t ind = ctx.independent_sweep.cumulative_bytes;
    const std::uint64_t del = ctx.delta_sweep.cumulative_bytes;
    const std::uint64_t bit = ctx.bitplane_sweep.cumulative_bytes;

    const auto close = [](std::uint64_t a, std::uint64_t b) {
        const double hi = static_cast<double>(std::max(a, b));
        const double lo = static_cast<double>(std::min(a, b));
        return hi - lo <= kByteAgreement * lo;
    };
    const bool ordering = ind >= del;
    const bool bit_inc = close(bit, ctx.bitplane_oneshot);
    const bool del_inc = close(del, ctx.delta_oneshot);
    const bool sat = ctx.independent_sweep.all_satisfied && ctx.delta_sweep.all_satisfied;
    return {ordering && bit_inc && del_inc && sat,
            fmt("cumulative bytes independent=%llu >= delta=%llu; incremental vs one-shot: "
                "bitplane %llu vs %llu, delta %llu vs %llu (within 1%%)",
                static_cast<unsigned long long>(ind), static_cast<unsigned long long>(del),
                static_cast<unsigned long long>(bit),
                static_cast<unsigned long long>(ctx.bitplane_oneshot),
                static_cast<unsigned long long>(del),
                static_cast<unsigned long long>(ctx.delta_oneshot))};
}

// ---- criterion 7: tightening-loop trace and termination bound ---------------

Outcome criterion7() {
    // Hand trace: one variable, estimate == its bound, target 0.5, c = 1.5.
    const QoiExprPtr expr = QoiExpr::var(0);
    const double point[] = {5.0};
    const double eps0[] = {0.9};
    const double floors[] = {0.0};
    const ReassignOutcome out = reassign_eb(*expr, point, eps0, floors, 0.5, 1.5);
    const double step1 = 0.9 / 1.5;       // 0.6, still above 0.5
    const double step2 = step1 / 1.5;     // 0.4 (to double precision), at or below
    const bool trace_exact = out.divisions == 2 && !out.floored &&
                             out.eps.size() == 1 && out.eps[0] == step2 && step1 > 0.5 &&
                             step2 <= 0.5;

    // Termination bound on a live session: iterations never exceed
    // #requests + 4 + sum_v ceil(log(initial/floor)/log c).
    const SweepContext& ctx = sweep_context();
    RetrievalSession session(*ctx.bitplane);
    RetrieveOptions opts;
    opts.qoi_value_ranges = &ctx.ranges;
    const double tau = ctx.schedule.back();
    const RetrievalReport report = session.retrieve(ctx.requests_at(tau), opts);

    double cap = static_cast<double>(ctx.qois.size()) + 4.0;
    for (const VarRecord& rec : ctx.bitplane->variables()) {
        const double init = std::min(1.0, tau) * rec.range();
        const double floor = rec.floor_bound();
        if (floor > 0.0 && init > floor)
            cap += std::ceil(std::log(init / floor) / std::log(1.5));
    }
    const bool bounded = report.satisfied && static_cast<double>(report.iterations) <= cap;

    return {trace_exact && bounded,
            fmt("division trace 0.9 -> %.17g -> %.17g (2 divisions) reproduced exactly; "
                "session used %u iterations <= bound %.0f",
                step1, step2, report.iterations, cap)};
}

// ---- criterion 8: builtin quantities vs closed forms -------------------------

Outcome criterion8() {
    constexpr double kR = 287.1, kGamma = 1.4, kMuRef = 1.716e-5, kTRef = 273.15,
                     kS = 110.4;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> vel(-500.0, 500.0);
    std::uniform_real_distribution<double> pres(1e4, 1e6);
    std::uniform_real_distribution<double> dens(0.1, 5.0);

    const auto qois = builtin_qois();
    double worst = 0.0;
    constexpr int kTrials = 10000;
    for (int t = 0; t < kTrials; ++t) {
        const double vx = vel(rng), vy = vel(rng), vz = vel(rng);
        const double p = pres(rng), d = dens(rng);
        const double values[5] = {vx, vy, vz, p, d};

        const double vtot = std::sqrt(vx * vx + vy * vy + vz * vz);
        const double temp = p / (d * kR);
        const double sound = std::sqrt(kGamma * kR * temp);
        const double mach = vtot / sound;
        const double ptot =
            p * std::pow(1.0 + 0.5 * (kGamma - 1.0) * mach * mach, kGamma / (kGamma - 1.0));
        const double visc =
            kMuRef * std::pow(temp / kTRef, 1.5) * (kTRef + kS) / (temp + kS);
        const double expected[6] = {vtot, temp, sound, mach, ptot, visc};

        for (std::size_t k = 0; k < qois.size(); ++k) {
            const double got = eval(*qois[k].second, values);
            worst = std::max(worst, std::fabs(got - expected[k]) /
                                        std::max(std::fabs(expected[k]), 1e-300));
        }
    }
    return {qois.size() == 6 && worst <= kBuiltinRelTol,
            fmt("6 builtin trees vs closed forms over %d random states, worst relative "
                "deviation %.3e (tol %.0e)",
                kTrials, worst, kBuiltinRelTol)};
}

// ---- criterion 9: outlier mask exactness and zero estimate contribution ------

Outcome criterion9() {
    const std::size_t n = 30000;
    const auto fields = synthesize("zero-patch-velocity", n, 555, 0.15);
    std::vector<VariableData> vars;
    for (const auto& f : fields)
        vars.push_back(VariableData::from_values(f.name, f.values));
    const OutlierMask mask = build_mask(vars);
    std::vector<std::size_t> masked_idx;
    for (std::size_t i = 0; i < n; ++i)
        if (mask.test(i))
            masked_idx.push_back(i);

    oracle::TempDir dir("acc-mask");
    long masked_violations = 0, prefix_count = 0;
    bool estimates_match = true;
    std::size_t est_argmax_masked = 0;

    for (const char* kind : {"bitplane", "snapshot-delta"}) {
        std::vector<RefactoredVariable> rvs;
        for (const VariableData& v : vars)
            rvs.push_back(refactor_variable(v, &mask, CodecConfig{kind, {}}));
        const std::filesystem::path sub = dir.path / kind;
        write_store(sub, rvs);
        const SegmentStore store = SegmentStore::open(sub);

        std::vector<RetrievalState> states;
        for (const VariableData& v : vars) {
            const VarRecord& rec = store.variable(v.name);
            RetrievalState st = init_state(store, rec);
            for (std::size_t i : masked_idx)
                if (st.values[i] != 0.0)
                    ++masked_violations;
            for (const SegmentMeta& seg : rec.segments) {
                reconstruct_to(store, rec, st, seg.nominal_bound);
                ++prefix_count;
                for (std::size_t i : masked_idx)
                    if (st.values[i] != 0.0)
                        ++masked_violations;
            }
            // Rewind to a mid-precision prefix for the estimate comparison.
            RetrievalState mid = init_state(store, rec);
            const std::size_t target = rec.segments.size() / 2;
            if (!rec.segments.empty())
                reconstruct_to(store, rec, mid, rec.segments[target].nominal_bound);
            states.push_back(std::move(mid));
        }

        // The scan must equal a manual scan that skips masked points entirely.
        const std::vector<std::string> names = {"Vx", "Vy", "Vz"};
        const QoiExprPtr expr = parse_qoi("sqrt(Vx^2 + Vy^2 + Vz^2)", names);
        const std::vector<QoiRequest> requests = {QoiRequest{"VTOT", expr, 1e-3}};
        std::vector<std::span<const double>> values;
        std::vector<double> eps;
        std::vector<const OutlierMask*> masks;
        for (const RetrievalState& st : states) {
            values.emplace_back(st.values);
            eps.push_back(st.achieved_bound);
            masks.push_back(st.has_mask ? &st.mask : nullptr);
        }
        const auto est = estimate_all(requests, values, eps, masks);

        double manual_max = 0.0;
        std::size_t manual_argmax = 0;
        std::vector<double> point(3);
        std::vector<ErrorBound> radii;
        for (double e : eps)
            radii.emplace_back(e);
        for (std::size_t j = 0; j < n; ++j) {
            if (mask.test(j))
                continue;
            for (std::size_t v = 0; v < 3; ++v)
                point[v] = states[v].values[j];
            const Propagated p = propagate(*expr, PointContext{point, radii});
            if (p.bound.value() > manual_max) {
                manual_max = p.bound.value();
                manual_argmax = j;
            }
        }
        estimates_match = estimates_match && est[0].max_abs == manual_max &&
                          est[0].argmax == manual_argmax;
        est_argmax_masked += mask.test(est[0].argmax) ? 1 : 0;
    }

    return {masked_violations == 0 && estimates_match && est_argmax_masked == 0,
            fmt("%zu masked points exact 0.0 across %ld prefixes x 2 codecs, %ld "
                "violations; masked points contribute nothing to QoI estimates "
                "(engine scan == unmasked-only manual scan)",
                masked_idx.size(), prefix_count, masked_violations)};
}

// ---- criterion 10: size reduction at tau = 1e-5, via the sweep CSV ----------

Outcome criterion10() {
    const SweepContext& ctx = sweep_context();
    oracle::TempDir dir("acc-reduction");

    for (const VariableData& v : ctx.vars)
        write_raw_array(dir.file(v.name + ".f64"), v.values);

    const std::string cli = PROQOI_CLI_PATH;
    const std::string store = dir.file("store");
    const std::string log = dir.file("log.txt");
    std::string refactor_cmd = cli + " refactor --codec bitplane --out " + store;
    for (const std::string& name : ctx.names)
        refactor_cmd += " --input " + dir.file(name + ".f64");
    refactor_cmd += " > " + log + " 2>&1";
    if (std::system(refactor_cmd.c_str()) != 0)
        return {false, "CLI refactor failed (see criterion 10 setup)"};

    const std::string csv = dir.file("sweep.csv");
    std::string sweep_cmd = cli + " sweep --store " + store +
                            " --qoi 'VTOT=sqrt(Vx^2 + Vy^2 + Vz^2)'"
                            " --qoi 'TA=P / (D * 287.1)'"
                            " --qoi 'PROD=P * D'"
                            " --qoi 'QUOT=Vx / D'"
                            " --schedule 1e-5 --out " + csv;
    for (const std::string& name : ctx.names)
        sweep_cmd += " --original " + name + "=" + dir.file(name + ".f64");
    sweep_cmd += " > " + log + " 2>&1";
    const int status = std::system(sweep_cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        return {false, "CLI sweep at tau=1e-5 did not exit 0"};

    std::ifstream in(csv);
    std::string line;
    std::getline(in, line); // header
    long rows = 0;
    double min_reduction = 1e300;
    bool all_satisfied = true;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        ++rows;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');)
            cells.push_back(cell);
        if (cells.size() != 10)
            return {false, "sweep CSV row has unexpected shape: " + line};
        all_satisfied = all_satisfied && cells[8] == "1";
        if (cells[9].empty())
            return {false, "sweep CSV reduction_factor column is empty"};
        min_reduction = std::min(min_reduction, std::stod(cells[9]));
        const double tau = std::stod(cells[2]);
        const double actual = std::stod(cells[4]);
        if (!(actual <= tau))
            return {false, fmt("measured error %.3e exceeds tau %.3e at rung 1e-5",
                               actual, tau)};
    }
    return {rows == 4 && all_satisfied && min_reduction > 1.0,
            fmt("tau=1e-5 relative, 4 QoIs satisfied, reduction factor %.2fx "
                "(retrieved bytes < original bytes)",
                min_reduction)};
}

using CriterionFn = Outcome (*)();

Outcome run_safely(CriterionFn fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return {false, std::string("unhandled exception: ") + e.what()};
    }
}

} // namespace

int main() {
    const struct {
        int id;
        const char* title;
        CriterionFn fn;
    } criteria[] = {
        {1, "certified bounds dominate brute-force sups", criterion1},
        {2, "tightness witnesses match sups to 1e-12", criterion2},
        {3, "composition soundness under perturbation fuzzing", criterion3},
        {4, "progressive prefixes honor nominal bounds through lossless", criterion4},
        {5, "sweep guarantee chain: actual <= estimated <= requested", criterion5},
        {6, "byte ordering and incremental-equals-one-shot", criterion6},
        {7, "tightening trace exact and iteration-bounded", criterion7},
        {8, "builtin quantities match closed forms", criterion8},
        {9, "masked points exact at every prefix, zero estimate share", criterion9},
        {10, "size reduction > 1x at tau = 1e-5", criterion10},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const Outcome o = run_safely(c.fn);
        std::printf("[%s] criterion %d: %s — %s\n", o.ok ? "PASS" : "FAIL", c.id, c.title,
                    o.detail.c_str());
        std::fflush(stdout);
        failures += o.ok ? 0 : 1;
    }
    if (failures == 0)
        std::printf("all %zu criteria passed\n", std::size(criteria));
    else
        std::printf("%d criteria FAILED\n", failures);
    return failures;
}
