#include "capagg/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <thread>

namespace capagg {

ProbVector PooledForecastSet::means() const {
    ProbVector q(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) q[i] = entries[i].q_hat;
    return q;
}

std::vector<double> PooledForecastSet::weights() const {
    std::vector<double> w(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) w[i] = entries[i].weight;
    return w;
}

std::vector<EventExpr> PooledForecastSet::event_list() const {
    std::vector<EventExpr> es;
    es.reserve(entries.size());
    for (const auto& e : entries) es.push_back(e.event);
    return es;
}

bool PooledForecastSet::all_truths_known() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const PooledEntry& e) { return e.truth.has_value(); });
}

std::size_t PooledForecastSet::find(const std::string& key) const {
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].key == key) return i;
    return SIZE_MAX;
}

PooledForecastSet pool(std::span<const Forecast> forecasts) {
    if (forecasts.empty()) throw DataError("no forecasts to pool");

    PooledForecastSet out;
    std::map<std::string, std::size_t> index;
    for (const Forecast& f : forecasts) {
        if (!(f.p_hat >= 0.0 && f.p_hat <= 1.0))
            throw DataError("probability " + std::to_string(f.p_hat) + " outside [0,1] (judge '" +
                            f.judge + "', event '" + f.event.to_string() + "')");
        const std::string key = canonical_key(f.event);
        auto [it, fresh] = index.emplace(key, out.entries.size());
        if (fresh) out.entries.push_back(PooledEntry{f.event, key, 0.0, 0.0, {}, {}});
        PooledEntry& e = out.entries[it->second];
        e.contributors.emplace_back(f.judge, f.p_hat);
        if (f.truth.has_value()) {
            if (e.truth.has_value() && *e.truth != *f.truth)
                throw DataError("conflicting truth values for event '" + f.event.to_string() +
                                "'");
            e.truth = f.truth;
        }
    }
    for (PooledEntry& e : out.entries) {
        double sum = 0.0;
        for (const auto& [judge, p] : e.contributors) sum += p;
        e.weight = static_cast<double>(e.contributors.size());
        e.q_hat = sum / e.weight;
    }
    return out;
}

PooledForecastSet linear_average(std::span<const Forecast> forecasts) {
    return pool(forecasts);
}

DesignStrategy design_strategy_from_name(std::string_view name) {
    if (name == "singleton") return DesignStrategy::Singleton;
    if (name == "neighborhood") return DesignStrategy::Neighborhood;
    if (name == "global") return DesignStrategy::Global;
    throw UsageError("unknown subset design '" + std::string(name) + "'");
}

std::string_view design_strategy_name(DesignStrategy s) {
    switch (s) {
    case DesignStrategy::Singleton: return "singleton";
    case DesignStrategy::Neighborhood: return "neighborhood";
    case DesignStrategy::Global: return "global";
    case DesignStrategy::Custom: return "custom";
    }
    return "custom";
}

Method method_from_name(std::string_view name) {
    if (name == "cyclic") return Method::Cyclic;
    if (name == "dykstra") return Method::Dykstra;
    throw UsageError("unknown method '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
    return m == Method::Cyclic ? "cyclic" : "dykstra";
}

namespace {

// Negation keys are involutive on truth tables, so one pass over ordered
// pairs finds each semantic (A, !A) pair exactly once.
std::vector<std::vector<std::size_t>> neighborhood_subsets(const PooledForecastSet& pooled) {
    const std::size_t m = pooled.size();
    std::vector<std::vector<std::size_t>> subsets;
    std::set<std::vector<std::size_t>> seen;
    std::vector<bool> covered(m, false);

    auto add = [&](std::vector<std::size_t> s) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        if (!seen.insert(s).second) return;
        for (std::size_t i : s) covered[i] = true;
        subsets.push_back(std::move(s));
    };

    std::vector<std::string> neg_key(m);
    for (std::size_t i = 0; i < m; ++i)
        neg_key[i] = canonical_key(EventExpr::negation(pooled.entries[i].event));

    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (neg_key[i] == pooled.entries[j].key) add({i, j});

    for (std::size_t i = 0; i < m; ++i) {
        const EventExpr& e = pooled.entries[i].event;
        if (e.kind() != EventExpr::Kind::And && e.kind() != EventExpr::Kind::Or) continue;
        std::vector<std::size_t> s = {i};
        for (const EventExpr& arg : {e.left(), e.right()}) {
            const std::size_t idx = pooled.find(canonical_key(arg));
            if (idx != SIZE_MAX) s.push_back(idx);
        }
        add(std::move(s));
    }

    for (std::size_t i = 0; i < m; ++i)
        if (!covered[i]) add({i});
    return subsets;
}

} // namespace

SubsetDesign design_subsets(const PooledForecastSet& pooled, DesignStrategy strategy,
                            std::size_t cap) {
    if (pooled.entries.empty()) throw DataError("cannot design subsets for an empty pool");
    SubsetDesign design;
    design.strategy = strategy;
    switch (strategy) {
    case DesignStrategy::Singleton:
        for (std::size_t i = 0; i < pooled.size(); ++i) design.subsets.push_back({i});
        break;
    case DesignStrategy::Neighborhood:
        design.subsets = neighborhood_subsets(pooled);
        break;
    case DesignStrategy::Global: {
        std::vector<std::size_t> all(pooled.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        design.subsets.push_back(std::move(all));
        break;
    }
    case DesignStrategy::Custom:
        throw UsageError("custom designs are assembled by the caller");
    }

    for (const auto& s : design.subsets) {
        std::vector<EventExpr> evs;
        for (std::size_t i : s) evs.push_back(pooled.entries[i].event);
        const std::size_t n = joint_support(evs).size();
        if (n > cap) throw SupportCapError(n, cap);
    }
    return design;
}

std::vector<std::vector<std::size_t>> schedule_parallel(const SubsetDesign& design) {
    std::vector<std::vector<std::size_t>> batches;
    std::vector<std::set<std::size_t>> used;
    for (std::size_t j = 0; j < design.subsets.size(); ++j) {
        const auto& s = design.subsets[j];
        std::size_t b = 0;
        for (; b < batches.size(); ++b) {
            bool clash = false;
            for (std::size_t idx : s)
                if (used[b].count(idx)) {
                    clash = true;
                    break;
                }
            if (!clash) break;
        }
        if (b == batches.size()) {
            batches.emplace_back();
            used.emplace_back();
        }
        batches[b].push_back(j);
        used[b].insert(s.begin(), s.end());
    }
    return batches;
}

std::vector<IndexedPolytope> build_local_polytopes(const PooledForecastSet& pooled,
                                                   const SubsetDesign& design, std::size_t cap) {
    std::vector<IndexedPolytope> out;
    out.reserve(design.subsets.size());
    for (const auto& s : design.subsets) {
        std::vector<EventExpr> evs;
        std::vector<double> w;
        for (std::size_t i : s) {
            if (i >= pooled.size()) throw UsageError("design index out of range");
            evs.push_back(pooled.entries[i].event);
            w.push_back(pooled.entries[i].weight);
        }
        out.push_back(IndexedPolytope{VertexPolytope::build(std::move(evs), std::move(w), cap), s});
    }
    return out;
}

namespace {

void check_coverage(const PooledForecastSet& pooled, const SubsetDesign& design) {
    std::vector<bool> covered(pooled.size(), false);
    for (const auto& s : design.subsets)
        for (std::size_t i : s) {
            if (i >= pooled.size()) throw UsageError("design index out of range");
            covered[i] = true;
        }
    for (std::size_t i = 0; i < covered.size(); ++i)
        if (!covered[i])
            throw UsageError("design leaves entry " + std::to_string(i) + " unconstrained");
}

double weighted_brier_total(const PooledForecastSet& pooled, const ProbVector& q) {
    double total = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double target = *pooled.entries[i].truth ? 1.0 : 0.0;
        const double d = target - q[i];
        total += pooled.entries[i].weight * d * d;
    }
    return total;
}

// Runs fn(j) for every j in the batch, concurrently when asked. Jobs touch
// disjoint coordinates, so the execution order cannot change the result.
template <typename Fn>
void run_batch(const std::vector<std::size_t>& batch, bool parallel, Fn&& fn) {
    if (!parallel || batch.size() < 2) {
        for (std::size_t j : batch) fn(j);
        return;
    }
    const std::size_t n_threads =
        std::min<std::size_t>(batch.size(), std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    std::vector<std::exception_ptr> errors(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        threads.emplace_back([&, t] {
            try {
                for (std::size_t k = t; k < batch.size(); k += n_threads) fn(batch[k]);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace

AggregationReport aggregate(const PooledForecastSet& pooled, const SubsetDesign& design,
                            const AggregateOptions& options) {
    if (options.max_sweeps < 1) throw UsageError("max_sweeps must be >= 1");
    check_coverage(pooled, design);

    const std::vector<IndexedPolytope> sets =
        build_local_polytopes(pooled, design, options.cap);

    // Visit order: the design order, or the batch concatenation when running
    // parallel (both are valid cycles through the same subsets).
    std::vector<std::vector<std::size_t>> batches;
    if (options.parallel) {
        batches = schedule_parallel(design);
    } else {
        batches.emplace_back();
        for (std::size_t j = 0; j < sets.size(); ++j) batches[0].push_back(j);
    }

    const bool score = pooled.all_truths_known();
    const double weight_sum = [&] {
        double s = 0.0;
        for (const auto& e : pooled.entries) s += e.weight;
        return s;
    }();

    AggregationReport report;
    ProbVector q = pooled.means();
    if (options.record_states) report.states.push_back(q);

    std::vector<std::vector<double>> corr;
    if (options.method == Method::Dykstra) {
        corr.resize(sets.size());
        for (std::size_t j = 0; j < sets.size(); ++j)
            corr[j].assign(sets[j].indices.size(), 0.0);
    }

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        SweepStats stats;
        std::vector<double> move_by_set(sets.size(), 0.0);
        std::vector<double> residual_by_set(sets.size(), 0.0);
        std::vector<double> corr_change_by_set(sets.size(), 0.0);

        for (const auto& batch : batches) {
            run_batch(batch, options.parallel, [&](std::size_t j) {
                const auto& idx = sets[j].indices;
                ProbVector u(idx.size());
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    u[i] = q[idx[i]];
                    if (options.method == Method::Dykstra) u[i] += corr[j][i];
                }
                const ProbVector y = project_onto(sets[j].poly, u, options.tolerances);
                double res2 = 0.0;
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    const double du = u[i] - y[i];
                    res2 += du * du;
                    move_by_set[j] = std::max(move_by_set[j], std::abs(y[i] - q[idx[i]]));
                    if (options.method == Method::Dykstra) {
                        const double p_new = u[i] - y[i];
                        const double dc = p_new - corr[j][i];
                        corr_change_by_set[j] += dc * dc;
                        corr[j][i] = p_new;
                    }
                    q[idx[i]] = y[i];
                }
                residual_by_set[j] = std::sqrt(res2);
            });
        }

        for (std::size_t j = 0; j < sets.size(); ++j) {
            stats.max_move = std::max(stats.max_move, move_by_set[j]);
            stats.max_residual = std::max(stats.max_residual, residual_by_set[j]);
        }
        if (score) {
            const double total = weighted_brier_total(pooled, q);
            stats.brier_weighted_total = total;
            stats.brier_weighted_mean = total / weight_sum;
        }
        report.sweeps.push_back(stats);
        report.iterations_run = sweep + 1;
        if (options.record_states) report.states.push_back(q);

        if (options.method == Method::Cyclic) {
            if (stats.max_move <= options.tol) {
                report.converged = true;
                break;
            }
        } else {
            double c2 = 0.0;
            for (double c : corr_change_by_set) c2 += c;
            if (std::sqrt(c2) <= options.tol) {
                report.converged = true;
                break;
            }
        }
    }

    report.final = std::move(q);
    return report;
}

} // namespace capagg
