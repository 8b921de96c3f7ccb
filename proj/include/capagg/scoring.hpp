#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capagg/engine.hpp"

namespace capagg {

// Quadratic penalty: sum over true events of (1 - p)^2 plus sum over false
// events of p^2, with the per-forecast mean alongside.
struct BrierResult {
    double total = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
};

// DataError if any forecast lacks a truth value.
BrierResult brier(std::span<const Forecast> forecasts);

// Weighted pooled score of a candidate vector against the pool's truths.
BrierResult weighted_brier(const PooledForecastSet& pooled, const ProbVector& q);

// Mean probability over true events minus mean over false events; higher is
// better. DataError when every event is true or every event is false.
double slope(std::span<const Forecast> forecasts);

enum class EvalCase { Raw, Individual, Aggregate, LinearAvg };

std::string_view eval_case_name(EvalCase c);

struct JudgeScore {
    std::string judge;
    double brier_total = 0.0;
    double brier_mean = 0.0;
    std::optional<double> slope;  // absent when the judge's events are one-sided
    std::size_t n_forecasts = 0;
};

struct ScoreReport {
    EvalCase which = EvalCase::Raw;
    std::vector<JudgeScore> judges;
    double panel_brier_mean = 0.0;           // judges weighted equally
    std::optional<double> panel_slope;       // mean over judges with defined slope
    std::string judge_weighting = "equal";   // the alternative would weight by forecast count
};

struct EvalConfig {
    DesignStrategy design = DesignStrategy::Neighborhood;
    AggregateOptions options{};
};

// The four-way evaluation:
//   raw        - each judge's unprocessed forecasts;
//   individual - each judge after eliminating their own incoherence;
//   aggregate  - each judge's forecasts replaced by the panel aggregate for
//                the same events;
//   linear_avg - the same replacement using the pooled means.
// Requires a truth for every event; throws DataError otherwise.
std::vector<ScoreReport> evaluate_cases(std::span<const Forecast> panel,
                                        const EvalConfig& config = {});

} // namespace capagg
