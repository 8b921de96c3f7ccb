#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capagg/coherence.hpp"
#include "capagg/event.hpp"

namespace capagg {

// One judge's probability assessment of one event, with the event's realized
// truth when known.
struct Forecast {
    std::string judge;
    EventExpr event;
    double p_hat = 0.0;
    std::optional<bool> truth;
};

// One pooled entry per semantically distinct event: the mean of the
// contributing assessments and their count as the multiplicity weight.
struct PooledEntry {
    EventExpr event;  // first-appearance representative
    std::string key;
    double q_hat = 0.0;
    double weight = 0.0;  // contribution count N_j (a positive integer)
    std::vector<std::pair<std::string, double>> contributors;  // (judge, p_hat)
    std::optional<bool> truth;
};

struct PooledForecastSet {
    std::vector<PooledEntry> entries;

    std::size_t size() const { return entries.size(); }
    ProbVector means() const;
    std::vector<double> weights() const;
    std::vector<EventExpr> event_list() const;
    bool all_truths_known() const;
    // Index of the entry with the given canonical key, or SIZE_MAX.
    std::size_t find(const std::string& key) const;
};

// Duplicate events (by canonical key) collapse into weighted means; insertion
// order follows first appearance. Rejects empty input, out-of-range
// probabilities and contradictory truth values for one event.
PooledForecastSet pool(std::span<const Forecast> forecasts);

// The linear-averaging baseline is exactly the pooling step.
PooledForecastSet linear_average(std::span<const Forecast> forecasts);

enum class DesignStrategy { Singleton, Neighborhood, Global, Custom };

DesignStrategy design_strategy_from_name(std::string_view name);
std::string_view design_strategy_name(DesignStrategy s);

// A family of index subsets over pooled entries; every entry is covered.
struct SubsetDesign {
    DesignStrategy strategy = DesignStrategy::Custom;
    std::vector<std::vector<std::size_t>> subsets;
};

// singleton    - one subset per entry.
// neighborhood - semantic negation pairs first, then one subset per
//                binary-connective entry joining it with any entries equal to
//                its argument subexpressions, then singletons for anything
//                still uncovered.
// global       - one subset holding everything (support cap permitting).
SubsetDesign design_subsets(const PooledForecastSet& pooled, DesignStrategy strategy,
                            std::size_t cap = kDefaultSupportCap);

// Greedy first-fit coloring of the subset-overlap graph: subsets within a
// batch touch disjoint entries, so their projections commute. Concatenating
// the batches is itself a valid sweep order.
std::vector<std::vector<std::size_t>> schedule_parallel(const SubsetDesign& design);

// Local polytopes for each subset, weighted by the pooled multiplicities.
std::vector<IndexedPolytope> build_local_polytopes(const PooledForecastSet& pooled,
                                                   const SubsetDesign& design,
                                                   std::size_t cap = kDefaultSupportCap);

enum class Method { Cyclic, Dykstra };

Method method_from_name(std::string_view name);
std::string_view method_name(Method m);

struct AggregateOptions {
    Method method = Method::Cyclic;
    int max_sweeps = 50;
    double tol = 1e-7;      // cyclic: max coordinate move per sweep;
                            // dykstra: correction-change norm per sweep
    bool parallel = false;  // execute schedule_parallel batches concurrently
    bool record_states = false;
    std::size_t cap = kDefaultSupportCap;
    Tolerances tolerances{};
};

struct SweepStats {
    double max_move = 0.0;      // largest coordinate change this sweep
    double max_residual = 0.0;  // largest local incoherence seen at visit time
    std::optional<double> brier_weighted_total;
    std::optional<double> brier_weighted_mean;
};

struct AggregationReport {
    ProbVector final;
    int iterations_run = 0;
    bool converged = false;
    std::vector<SweepStats> sweeps;
    // When record_states: states[0] is the pooled input, states[t] the vector
    // after sweep t.
    std::vector<ProbVector> states;
};

// Runs the cyclic (or Dykstra-corrected) projection sweeps over the design's
// local coherence sets, starting from the pooled means. Non-convergence within
// max_sweeps is reported, not thrown. Parallel and sequential execution of the
// same schedule produce identical results; the parallel schedule itself is the
// batch concatenation, which may reorder subsets relative to the design.
AggregationReport aggregate(const PooledForecastSet& pooled, const SubsetDesign& design,
                            const AggregateOptions& options = {});

} // namespace capagg
