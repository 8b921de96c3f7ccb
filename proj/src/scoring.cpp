#include "capagg/scoring.hpp"

#include <algorithm>
#include <map>

namespace capagg {

BrierResult brier(std::span<const Forecast> forecasts) {
    if (forecasts.empty()) throw DataError("no forecasts to score");
    BrierResult r;
    for (const Forecast& f : forecasts) {
        if (!f.truth.has_value())
            throw DataError("forecast for event '" + f.event.to_string() +
                            "' (judge '" + f.judge + "') lacks a truth value");
        const double target = *f.truth ? 1.0 : 0.0;
        const double d = target - f.p_hat;
        r.total += d * d;
        ++r.count;
    }
    r.mean = r.total / static_cast<double>(r.count);
    return r;
}

BrierResult weighted_brier(const PooledForecastSet& pooled, const ProbVector& q) {
    if (q.size() != pooled.size())
        throw UsageError("probability vector does not match pool size");
    BrierResult r;
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const PooledEntry& e = pooled.entries[i];
        if (!e.truth.has_value())
            throw DataError("pooled event '" + e.event.to_string() + "' lacks a truth value");
        const double target = *e.truth ? 1.0 : 0.0;
        const double d = target - q[i];
        r.total += e.weight * d * d;
        weight_sum += e.weight;
        ++r.count;
    }
    r.mean = r.total / weight_sum;
    return r;
}

double slope(std::span<const Forecast> forecasts) {
    double sum_true = 0.0, sum_false = 0.0;
    std::size_t n_true = 0, n_false = 0;
    for (const Forecast& f : forecasts) {
        if (!f.truth.has_value())
            throw DataError("forecast for event '" + f.event.to_string() +
                            "' lacks a truth value");
        if (*f.truth) {
            sum_true += f.p_hat;
            ++n_true;
        } else {
            sum_false += f.p_hat;
            ++n_false;
        }
    }
    if (n_true == 0 || n_false == 0)
        throw DataError("slope undefined: needs at least one true and one false event");
    return sum_true / static_cast<double>(n_true) - sum_false / static_cast<double>(n_false);
}

std::string_view eval_case_name(EvalCase c) {
    switch (c) {
    case EvalCase::Raw: return "raw";
    case EvalCase::Individual: return "individual";
    case EvalCase::Aggregate: return "aggregate";
    case EvalCase::LinearAvg: return "linear_avg";
    }
    return "raw";
}

namespace {

std::optional<double> try_slope(std::span<const Forecast> fs) {
    try {
        return slope(fs);
    } catch (const DataError&) {
        return std::nullopt;
    }
}

ScoreReport score_per_judge(EvalCase which,
                            const std::vector<std::pair<std::string, std::vector<Forecast>>>& by_judge) {
    ScoreReport rep;
    rep.which = which;
    double brier_sum = 0.0;
    double slope_sum = 0.0;
    std::size_t slope_n = 0;
    for (const auto& [judge, fs] : by_judge) {
        JudgeScore js;
        js.judge = judge;
        const BrierResult b = brier(fs);
        js.brier_total = b.total;
        js.brier_mean = b.mean;
        js.n_forecasts = b.count;
        js.slope = try_slope(fs);
        brier_sum += js.brier_mean;
        if (js.slope) {
            slope_sum += *js.slope;
            ++slope_n;
        }
        rep.judges.push_back(std::move(js));
    }
    rep.panel_brier_mean = brier_sum / static_cast<double>(by_judge.size());
    if (slope_n > 0) rep.panel_slope = slope_sum / static_cast<double>(slope_n);
    return rep;
}

// Replace each forecast's probability with `value_of(canonical key)`.
std::vector<Forecast> replace_probs(const std::vector<Forecast>& fs,
                                    const PooledForecastSet& pooled, const ProbVector& q) {
    std::vector<Forecast> out = fs;
    for (Forecast& f : out) {
        const std::size_t idx = pooled.find(canonical_key(f.event));
        if (idx == SIZE_MAX)
            throw UsageError("event '" + f.event.to_string() + "' missing from pool");
        f.p_hat = q[idx];
    }
    return out;
}

} // namespace

std::vector<ScoreReport> evaluate_cases(std::span<const Forecast> panel,
                                        const EvalConfig& config) {
    if (panel.empty()) throw DataError("no forecasts to evaluate");
    for (const Forecast& f : panel)
        if (!f.truth.has_value())
            throw DataError("evaluation requires a truth for every event; missing for '" +
                            f.event.to_string() + "'");

    // Group by judge, first-appearance order.
    std::vector<std::pair<std::string, std::vector<Forecast>>> by_judge;
    std::map<std::string, std::size_t> judge_index;
    for (const Forecast& f : panel) {
        auto [it, fresh] = judge_index.emplace(f.judge, by_judge.size());
        if (fresh) by_judge.emplace_back(f.judge, std::vector<Forecast>{});
        by_judge[it->second].second.push_back(f);
    }

    const PooledForecastSet pooled_all = pool(panel);
    const SubsetDesign design_all =
        design_subsets(pooled_all, config.design, config.options.cap);
    const AggregationReport agg = aggregate(pooled_all, design_all, config.options);

    std::vector<ScoreReport> reports;
    reports.push_back(score_per_judge(EvalCase::Raw, by_judge));

    std::vector<std::pair<std::string, std::vector<Forecast>>> individual;
    for (const auto& [judge, fs] : by_judge) {
        const PooledForecastSet own = pool(fs);
        const SubsetDesign own_design = design_subsets(own, config.design, config.options.cap);
        const AggregationReport own_agg = aggregate(own, own_design, config.options);
        individual.emplace_back(judge, replace_probs(fs, own, own_agg.final));
    }
    reports.push_back(score_per_judge(EvalCase::Individual, individual));

    std::vector<std::pair<std::string, std::vector<Forecast>>> aggregated;
    for (const auto& [judge, fs] : by_judge)
        aggregated.emplace_back(judge, replace_probs(fs, pooled_all, agg.final));
    reports.push_back(score_per_judge(EvalCase::Aggregate, aggregated));

    const ProbVector means = pooled_all.means();
    std::vector<std::pair<std::string, std::vector<Forecast>>> averaged;
    for (const auto& [judge, fs] : by_judge)
        averaged.emplace_back(judge, replace_probs(fs, pooled_all, means));
    reports.push_back(score_per_judge(EvalCase::LinearAvg, averaged));

    return reports;
}

} // namespace capagg
