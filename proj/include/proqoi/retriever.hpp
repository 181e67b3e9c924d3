#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proqoi/codec.hpp"
#include "proqoi/expr.hpp"
#include "proqoi/store.hpp"

namespace proqoi {

// One derived quantity with a tolerance. The tolerance is relative to the
// QoI's value range unless the retrieval runs in absolute mode. Expression
// variable indices refer to the session's variable order (the store's
// manifest order).
struct QoiRequest {
    std::string name;
    QoiExprPtr expr;
    double tolerance = 0.0;
};

struct RetrieveOptions {
    double reduction_factor = 1.5; // divisor applied by the tightening loop
    bool absolute = false;         // tolerances are absolute QoI errors
    // True QoI value ranges (e.g. computed from original data by the
    // evaluation harness). When a QoI's name is missing, the denominator
    // falls back to the range of the QoI over the current reconstruction.
    const std::map<std::string, double>* qoi_value_ranges = nullptr;
    std::ostream* trace = nullptr; // per-iteration CSV rows, written if set
    int threads = 0;               // point-scan parallelism; 0 = PROQOI_THREADS/hardware
};

struct VariableOutcome {
    std::string name;
    bool involved = false;    // referenced by at least one request
    double eps = 0.0;         // certified sup bound of the final reconstruction
    std::uint64_t bytes = 0;  // cumulative payload bytes consumed by this session
    double bits_per_value = 0.0;
    bool full_fidelity = false;
};

struct QoiOutcome {
    std::string name;
    double tolerance = 0.0;
    double estimate = 0.0;     // max estimated error, in tolerance units
    double estimate_abs = 0.0; // same, before dividing by the denominator
    double denominator = 1.0;
    std::size_t argmax = 0;    // point index of the max estimate
    bool satisfied = false;
};

struct RetrievalReport {
    bool satisfied = false;
    std::uint32_t iterations = 0;
    bool absolute = false;
    std::uint64_t total_bytes = 0;
    std::vector<VariableOutcome> variables;
    std::vector<QoiOutcome> qois;

    std::string to_json(int indent = 2) const;
};

// Initial error-bound assignment for one variable: the relative bound starts
// at the maximal value 1 and is minimized over the tolerances of the QoIs
// touching the variable; the absolute bound is that fraction of the value
// range. Returns nothing when no QoI touches the variable (no retrieval
// needed).
std::optional<double> assign_eb(double range, std::span<const double> involved_taus);

struct ReassignOutcome {
    std::vector<double> eps; // tightened per-variable absolute bounds
    int divisions = 0;       // joint division steps performed
    bool floored = false;    // stopped at the floor with the estimate still high
};

// Iterative tightening at one point: divides the bounds of every variable
// the expression involves by `c` (clamping at the per-variable floor) and
// re-propagates at the fixed point values, until the estimated error is at
// most target_abs or every involved bound sits at its floor.
ReassignOutcome reassign_eb(const QoiExpr& expr, std::span<const double> point_values,
                            std::span<const double> current_eps,
                            std::span<const double> floor_eps, double target_abs, double c);

// One QoI's scan result over all points.
struct QoiEstimate {
    double max_abs = 0.0;      // largest estimated error (+inf when unbounded)
    std::size_t argmax = 0;    // first point attaining it
    double value_min = 0.0;    // finite QoI values seen, for the online range
    double value_max = 0.0;
    bool any_finite_value = false;
};

// Pure scan of every point for every request: per-point propagation with
// masked points contributing exact values and zero bounds. `values` and
// `eps` are indexed by the variable order the expressions were parsed
// against; `masks` entries may be null.
std::vector<QoiEstimate> estimate_all(std::span<const QoiRequest> requests,
                                      std::span<const std::span<const double>> values,
                                      std::span<const double> eps,
                                      std::span<const OutlierMask* const> masks, int threads = 0);

// Progressive, QoI-toleranced retrieval against one store. The session keeps
// per-variable reconstruction state across retrieve() calls, so a sweep of
// tightening tolerances pays only the incremental segments each time.
class RetrievalSession {
  public:
    explicit RetrievalSession(const SegmentStore& store);

    std::span<const std::string> variable_names() const noexcept { return names_; }

    // Runs the retrieval loop: assign initial bounds, reconstruct, scan,
    // tighten at each violated QoI's argmax, repeat — until every estimate
    // meets its tolerance or every involved variable is at full fidelity.
    RetrievalReport retrieve(std::span<const QoiRequest> requests, const RetrieveOptions& opts);

    const RetrievalState& state(const std::string& var_name) const;
    std::uint64_t total_bytes() const noexcept;

  private:
    const SegmentStore* store_;
    std::vector<std::string> names_;
    std::vector<RetrievalState> states_;
    std::vector<bool> touched_; // ever involved in any retrieve() call
};

// Point-scan thread count: explicit request, else PROQOI_THREADS, else
// hardware concurrency; always at least 1.
int resolve_threads(int requested) noexcept;

} // namespace proqoi
