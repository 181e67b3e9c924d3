#include "proqoi/retriever.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "proqoi/propagate.hpp"

namespace proqoi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void collect_vars(const QoiExpr& e, std::set<std::size_t>& out) {
    if (e.kind() == QoiKind::Var)
        out.insert(e.var_index());
    for (const auto& child : e.children())
        collect_vars(*child, out);
}

// Estimated sup error as a plain double: +inf when unbounded, and NaN (which
// can arise from non-finite reconstructed intermediates) conservatively
// promoted to +inf.
double bound_as_double(const ErrorBound& b) {
    if (b.is_unbounded())
        return kInf;
    const double v = b.value();
    return std::isnan(v) ? kInf : v;
}

struct ScanChunk {
    double max_abs = -1.0;
    std::size_t argmax = 0;
    double value_min = kInf;
    double value_max = -kInf;
    bool any_finite = false;
    std::size_t error_index = SIZE_MAX; // first point whose evaluation threw
    std::string error_what;
};

ScanChunk scan_points(const QoiExpr& expr, std::span<const std::size_t> involved,
                      std::span<const std::span<const double>> values,
                      std::span<const double> eps, std::span<const OutlierMask* const> masks,
                      std::size_t lo, std::size_t hi) {
    const std::size_t nv = values.size();
    std::vector<double> point(nv, 0.0);
    std::vector<ErrorBound> bounds(nv);
    ScanChunk out;
    for (std::size_t j = lo; j < hi; ++j) {
        for (std::size_t v : involved) {
            point[v] = values[v][j];
            const bool masked = masks[v] != nullptr && masks[v]->test(j);
            bounds[v] = masked ? ErrorBound::zero() : ErrorBound(eps[v]);
        }
        Propagated p;
        try {
            p = propagate(expr, PointContext{std::span<const double>(point),
                                             std::span<const ErrorBound>(bounds)});
        } catch (const std::domain_error& e) {
            out.error_index = j;
            out.error_what = e.what();
            return out;
        }
        const double b = bound_as_double(p.bound);
        if (b > out.max_abs) {
            out.max_abs = b;
            out.argmax = j;
        }
        if (std::isfinite(p.value)) {
            out.any_finite = true;
            out.value_min = std::min(out.value_min, p.value);
            out.value_max = std::max(out.value_max, p.value);
        }
    }
    return out;
}

[[noreturn]] void throw_scan_error(const QoiRequest& req, std::span<const std::size_t> involved,
                                   std::span<const std::span<const double>> values,
                                   std::size_t j, const std::string& what) {
    std::ostringstream msg;
    msg << "QoI '" << req.name << "' failed to evaluate at point " << j << " (values:";
    for (std::size_t v : involved)
        msg << " v" << v << "=" << values[v][j];
    msg << "): " << what;
    throw std::runtime_error(msg.str());
}

} // namespace

int resolve_threads(int requested) noexcept {
    int cap = 64;
    if (const char* env = std::getenv("PROQOI_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1 && v <= 64)
            cap = static_cast<int>(v);
    }
    int n = requested >= 1 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1)
        n = 1;
    return std::min(n, cap);
}

std::optional<double> assign_eb(double range, std::span<const double> involved_taus) {
    if (involved_taus.empty())
        return std::nullopt;
    double rel = 1.0;
    for (double tau : involved_taus)
        rel = std::min(rel, tau);
    return rel * range;
}

ReassignOutcome reassign_eb(const QoiExpr& expr, std::span<const double> point_values,
                            std::span<const double> current_eps,
                            std::span<const double> floor_eps, double target_abs, double c) {
    if (current_eps.size() != point_values.size() || floor_eps.size() != point_values.size())
        throw std::invalid_argument("reassign_eb spans must have equal lengths");
    if (!(c > 1.0))
        throw std::invalid_argument("reduction factor must exceed 1");

    std::set<std::size_t> involved;
    collect_vars(expr, involved);

    ReassignOutcome out;
    out.eps.assign(current_eps.begin(), current_eps.end());

    std::vector<ErrorBound> bounds(out.eps.size());
    const auto estimate = [&]() {
        for (std::size_t v = 0; v < out.eps.size(); ++v)
            bounds[v] = ErrorBound(out.eps[v]);
        const Propagated p = propagate(
            expr, PointContext{point_values, std::span<const ErrorBound>(bounds)});
        return bound_as_double(p.bound);
    };

    double est = estimate();
    while (!(est <= target_abs)) {
        bool changed = false;
        for (std::size_t v : involved) {
            const double next = std::max(out.eps[v] / c, floor_eps[v]);
            if (next < out.eps[v]) {
                out.eps[v] = next;
                changed = true;
            }
        }
        if (!changed) {
            out.floored = true;
            break;
        }
        ++out.divisions;
        est = estimate();
    }
    return out;
}

std::vector<QoiEstimate> estimate_all(std::span<const QoiRequest> requests,
                                      std::span<const std::span<const double>> values,
                                      std::span<const double> eps,
                                      std::span<const OutlierMask* const> masks, int threads) {
    if (values.size() != eps.size() || values.size() != masks.size())
        throw std::invalid_argument("estimate_all spans must have equal lengths");

    const int nthreads = resolve_threads(threads);
    std::vector<QoiEstimate> out;
    out.reserve(requests.size());

    for (const QoiRequest& req : requests) {
        std::set<std::size_t> involved_set;
        collect_vars(*req.expr, involved_set);
        const std::vector<std::size_t> involved(involved_set.begin(), involved_set.end());

        // Only the variables the expression references are indexed, so they
        // (and only they) must agree on length.
        std::size_t n = values.empty() ? 0 : 1; // constant QoI: one point suffices
        for (std::size_t i = 0; i < involved.size(); ++i) {
            if (involved[i] >= values.size())
                throw std::invalid_argument("QoI '" + req.name +
                                            "' references a variable index beyond the data");
            if (i == 0)
                n = values[involved[i]].size();
            else if (values[involved[i]].size() != n)
                throw std::invalid_argument("QoI '" + req.name +
                                            "' spans variables of different lengths");
        }

        std::vector<ScanChunk> chunks;
        if (nthreads <= 1 || n < 16384) {
            chunks.push_back(scan_points(*req.expr, involved, values, eps, masks, 0, n));
        } else {
            const std::size_t parts = std::min<std::size_t>(static_cast<std::size_t>(nthreads),
                                                            std::max<std::size_t>(n / 4096, 1));
            chunks.resize(parts);
            std::vector<std::thread> pool;
            pool.reserve(parts);
            for (std::size_t t = 0; t < parts; ++t) {
                const std::size_t lo = n * t / parts;
                const std::size_t hi = n * (t + 1) / parts;
                pool.emplace_back([&, t, lo, hi] {
                    chunks[t] = scan_points(*req.expr, involved, values, eps, masks, lo, hi);
                });
            }
            for (auto& th : pool)
                th.join();
        }

        // Merge in chunk order so ties keep the lowest point index, and the
        // earliest evaluation error (if any) is the one reported.
        QoiEstimate est;
        est.value_min = kInf;
        est.value_max = -kInf;
        double best = -1.0;
        for (const ScanChunk& ch : chunks) {
            if (ch.error_index != SIZE_MAX)
                throw_scan_error(req, involved, values, ch.error_index, ch.error_what);
            if (ch.max_abs > best) {
                best = ch.max_abs;
                est.argmax = ch.argmax;
            }
            if (ch.any_finite) {
                est.any_finite_value = true;
                est.value_min = std::min(est.value_min, ch.value_min);
                est.value_max = std::max(est.value_max, ch.value_max);
            }
        }
        est.max_abs = best < 0.0 ? 0.0 : best;
        if (!est.any_finite_value) {
            est.value_min = 0.0;
            est.value_max = 0.0;
        }
        out.push_back(est);
    }
    return out;
}

RetrievalSession::RetrievalSession(const SegmentStore& store) : store_(&store) {
    for (const VarRecord& rec : store.variables()) {
        names_.push_back(rec.name);
        states_.push_back(init_state(store, rec));
        touched_.push_back(false);
    }
}

const RetrievalState& RetrievalSession::state(const std::string& var_name) const {
    for (std::size_t v = 0; v < names_.size(); ++v)
        if (names_[v] == var_name)
            return states_[v];
    throw StoreError("session has no variable named '" + var_name + "'");
}

std::uint64_t RetrievalSession::total_bytes() const noexcept {
    std::uint64_t total = 0;
    for (const RetrievalState& st : states_)
        total += st.bytes_consumed;
    return total;
}

RetrievalReport RetrievalSession::retrieve(std::span<const QoiRequest> requests,
                                           const RetrieveOptions& opts) {
    const std::size_t nv = names_.size();
    const double c = opts.reduction_factor;
    if (!(c > 1.0))
        throw std::invalid_argument("reduction factor must exceed 1");

    // Per-request involvement and per-variable tolerance lists.
    std::vector<std::set<std::size_t>> involved(requests.size());
    std::vector<std::vector<double>> taus_per_var(nv);
    for (std::size_t k = 0; k < requests.size(); ++k) {
        const QoiRequest& req = requests[k];
        if (!req.expr)
            throw std::invalid_argument("QoI '" + req.name + "' has no expression");
        if (!(req.tolerance > 0.0) || !std::isfinite(req.tolerance))
            throw std::invalid_argument("QoI '" + req.name +
                                        "' tolerance must be positive and finite");
        if (req.expr->variable_count_required() > nv)
            throw std::invalid_argument("QoI '" + req.name +
                                        "' references more variables than the store holds");
        collect_vars(*req.expr, involved[k]);
        for (std::size_t v : involved[k]) {
            taus_per_var[v].push_back(req.tolerance);
            touched_[v] = true;
        }
    }

    // eps[] holds the per-variable error-bound *targets*. The loop divides
    // these targets on the fixed lattice assigned/c^k and asks the codec to
    // meet them; it never re-anchors on the (segment-quantized) achieved
    // bounds. That keeps every decision a pure function of the requests and
    // the data, so an incremental walk through a tolerance schedule consumes
    // the same segment prefix — and the same bytes — as a one-shot retrieval
    // at the final tolerance. Estimates computed at target radii remain
    // certified: reconstruction achieves at most the target, and propagated
    // bounds are monotone in the radii.
    const auto records = store_->variables();
    std::vector<double> floors(nv), eps(nv);
    std::vector<const OutlierMask*> masks(nv, nullptr);
    for (std::size_t v = 0; v < nv; ++v) {
        floors[v] = records[v].floor_bound();
        eps[v] = states_[v].achieved_bound;
        if (states_[v].has_mask)
            masks[v] = &states_[v].mask;
        // The tiny shave keeps the denominator round trip (estimate_abs /
        // denom vs tolerance * denom) from landing one ulp above a tolerance
        // that the assignment meets exactly.
        if (const auto assigned = assign_eb(records[v].range(), taus_per_var[v]))
            eps[v] = *assigned * (1.0 - 4.0 * DBL_EPSILON);
    }

    // Hard iteration cap backing the termination argument: every iteration
    // with a violation divides at least one involved variable's bound by c
    // (or exits), so the loop length is bounded by the sum of the per-
    // variable division budgets.
    std::uint32_t cap = static_cast<std::uint32_t>(requests.size()) + 4;
    for (std::size_t v = 0; v < nv; ++v)
        if (!taus_per_var[v].empty() && floors[v] > 0.0 && eps[v] > floors[v])
            cap += static_cast<std::uint32_t>(
                std::ceil(std::log(eps[v] / floors[v]) / std::log(c)));

    RetrievalReport report;
    report.absolute = opts.absolute;
    report.qois.resize(requests.size());
    for (std::size_t k = 0; k < requests.size(); ++k) {
        report.qois[k].name = requests[k].name;
        report.qois[k].tolerance = requests[k].tolerance;
    }

    std::vector<std::span<const double>> value_spans(nv);
    std::vector<double> denoms(requests.size(), 1.0);
    // Radii actually certified by the reconstructions. Normally the codec
    // meets the target, so this equals the target; when a target falls below
    // the store's floor the achieved bound wins — the floor is a property of
    // the store, so this stays independent of the request history.
    std::vector<double> certified(nv, 0.0);

    if (opts.trace) {
        *opts.trace << "iteration";
        for (std::size_t v = 0; v < nv; ++v)
            *opts.trace << ",eps_" << names_[v];
        for (const QoiRequest& req : requests)
            *opts.trace << ",est_" << req.name;
        *opts.trace << ",bytes\n";
    }

    bool satisfied = requests.empty();
    std::uint32_t iter = 0;
    while (iter < cap && !requests.empty()) {
        ++iter;
        for (std::size_t v = 0; v < nv; ++v) {
            if (taus_per_var[v].empty())
                continue;
            reconstruct_to(*store_, records[v], states_[v], eps[v]);
        }
        for (std::size_t v = 0; v < nv; ++v) {
            value_spans[v] = std::span<const double>(states_[v].values);
            certified[v] = std::max(eps[v], states_[v].achieved_bound);
        }

        const std::vector<QoiEstimate> estimates =
            estimate_all(requests, value_spans, certified, masks, opts.threads);

        for (std::size_t k = 0; k < requests.size(); ++k) {
            double denom = 1.0;
            if (!opts.absolute) {
                if (opts.qoi_value_ranges) {
                    const auto it = opts.qoi_value_ranges->find(requests[k].name);
                    if (it != opts.qoi_value_ranges->end() && it->second > 0.0 &&
                        std::isfinite(it->second)) {
                        denom = it->second;
                    } else if (const double r = estimates[k].value_max - estimates[k].value_min;
                               r > 0.0) {
                        denom = r;
                    }
                } else if (const double r = estimates[k].value_max - estimates[k].value_min;
                           r > 0.0) {
                    denom = r;
                }
            }
            denoms[k] = denom;
            QoiOutcome& q = report.qois[k];
            q.estimate_abs = estimates[k].max_abs;
            q.estimate = estimates[k].max_abs / denom;
            q.denominator = denom;
            q.argmax = estimates[k].argmax;
            q.satisfied = q.estimate <= requests[k].tolerance;
        }

        if (opts.trace) {
            *opts.trace << iter;
            for (std::size_t v = 0; v < nv; ++v) {
                *opts.trace << ",";
                if (!taus_per_var[v].empty())
                    *opts.trace << certified[v];
            }
            for (const QoiOutcome& q : report.qois)
                *opts.trace << "," << q.estimate;
            *opts.trace << "," << total_bytes() << "\n";
        }

        bool any_violated = false;
        bool improvable = false;
        for (std::size_t k = 0; k < requests.size(); ++k) {
            if (report.qois[k].satisfied)
                continue;
            any_violated = true;
            for (std::size_t v : involved[k])
                if (!states_[v].full_fidelity)
                    improvable = true;
        }
        if (!any_violated) {
            satisfied = true;
            break;
        }
        if (!improvable)
            break; // every violated QoI is already at full fidelity

        for (std::size_t k = 0; k < requests.size(); ++k) {
            const QoiOutcome& q = report.qois[k];
            if (q.satisfied)
                continue;
            const std::size_t j = q.argmax;
            const double target_abs =
                requests[k].tolerance * denoms[k] * (1.0 - 4.0 * DBL_EPSILON);

            std::vector<double> point(nv, 0.0), point_eps(nv, 0.0), point_floor(nv, 0.0);
            for (std::size_t v : involved[k]) {
                point[v] = states_[v].values[j];
                const bool masked = masks[v] != nullptr && masks[v]->test(j);
                point_eps[v] = masked ? 0.0 : certified[v];
                point_floor[v] = masked ? 0.0 : floors[v];
            }
            const ReassignOutcome tightened = reassign_eb(
                *requests[k].expr, point, point_eps, point_floor, target_abs, c);
            for (std::size_t v : involved[k]) {
                const bool masked = masks[v] != nullptr && masks[v]->test(j);
                if (!masked) {
                    eps[v] = std::min(eps[v], tightened.eps[v]);
                } else {
                    // The point's own bound was pinned at zero; apply the
                    // same joint divisions to the variable's global bound.
                    for (int d = 0; d < tightened.divisions; ++d)
                        eps[v] = std::max(eps[v] / c, floors[v]);
                }
            }
        }
    }

    report.satisfied = satisfied;
    report.iterations = iter;
    report.total_bytes = total_bytes();
    report.variables.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        VariableOutcome& out = report.variables[v];
        out.name = names_[v];
        out.involved = !taus_per_var[v].empty();
        out.eps = states_[v].achieved_bound;
        out.bytes = states_[v].bytes_consumed;
        out.bits_per_value =
            8.0 * static_cast<double>(out.bytes) / static_cast<double>(records[v].count);
        out.full_fidelity = states_[v].full_fidelity;
    }
    return report;
}

std::string RetrievalReport::to_json(int indent) const {
    using json = nlohmann::json;
    const auto number_or_null = [](double v) -> json {
        return std::isfinite(v) ? json(v) : json(nullptr);
    };
    json j;
    j["satisfied"] = satisfied;
    j["iterations"] = iterations;
    j["absolute"] = absolute;
    j["total_bytes"] = total_bytes;
    j["variables"] = json::array();
    for (const VariableOutcome& v : variables)
        j["variables"].push_back({{"name", v.name},
                                  {"involved", v.involved},
                                  {"eps", number_or_null(v.eps)},
                                  {"bytes", v.bytes},
                                  {"bits_per_value", v.bits_per_value},
                                  {"full_fidelity", v.full_fidelity}});
    j["qois"] = json::array();
    for (const QoiOutcome& q : qois)
        j["qois"].push_back({{"name", q.name},
                             {"tolerance", q.tolerance},
                             {"estimate", number_or_null(q.estimate)},
                             {"estimate_abs", number_or_null(q.estimate_abs)},
                             {"denominator", q.denominator},
                             {"argmax", q.argmax},
                             {"satisfied", q.satisfied}});
    return j.dump(indent);
}

} // namespace proqoi
