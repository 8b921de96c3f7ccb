#include "capagg/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace capagg {

using json = nlohmann::ordered_json;

AggregateOptions RunConfig::aggregate_options() const {
    AggregateOptions opt;
    opt.method = method;
    opt.max_sweeps = max_sweeps;
    opt.tol = tol;
    opt.parallel = parallel;
    opt.cap = cap;
    return opt;
}

std::string format_probability(double p) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), p);
    return std::string(buf, res.ptr);
}

// --- file formats -----------------------------------------------------------

namespace {

std::string trim(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

double parse_prob(const std::string& text, const std::string& where) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw DataError(where + ": cannot parse probability '" + text + "'");
    if (!(v >= 0.0 && v <= 1.0))
        throw DataError(where + ": probability " + text + " outside [0,1]");
    return v;
}

std::optional<bool> parse_truth(const std::string& text, const std::string& where) {
    if (text.empty()) return std::nullopt;
    if (text == "0") return false;
    if (text == "1") return true;
    throw DataError(where + ": truth must be 0, 1 or empty; got '" + text + "'");
}

EventExpr parse_event_field(const std::string& text, const std::string& where) {
    try {
        return parse_event(text);
    } catch (const ParseError& e) {
        throw DataError(where + ": bad event '" + text + "': " + e.what());
    }
}

bool is_jsonl(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return ext == ".jsonl" || ext == ".ndjson";
}

} // namespace

std::vector<Forecast> read_forecasts_csv(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(name + ": no forecasts (empty file)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line) != "judge,event,prob,truth")
        throw DataError(name + " row 1: expected header 'judge,event,prob,truth'");

    std::vector<Forecast> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::string where = name + " row " + std::to_string(row);

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));
        if (!line.empty() && line.back() == ',') fields.push_back("");
        if (fields.size() != 3 && fields.size() != 4)
            throw DataError(where + ": expected 4 comma-separated fields, got " +
                            std::to_string(fields.size()));

        Forecast f{fields[0], parse_event_field(fields[1], where),
                   parse_prob(fields[2], where),
                   fields.size() == 4 ? parse_truth(fields[3], where) : std::nullopt};
        if (f.judge.empty()) throw DataError(where + ": empty judge id");
        out.push_back(std::move(f));
    }
    if (out.empty()) throw DataError(name + ": no forecasts");
    return out;
}

std::vector<Forecast> read_forecasts_jsonl(std::istream& in, const std::string& name) {
    std::vector<Forecast> out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::string where = name + " row " + std::to_string(row);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(where + ": bad JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("judge") || !j.contains("event") ||
            !j.contains("prob"))
            throw DataError(where + ": need fields judge, event, prob");
        const double p = j["prob"].get<double>();
        if (!(p >= 0.0 && p <= 1.0))
            throw DataError(where + ": probability " + format_probability(p) +
                            " outside [0,1]");
        Forecast f{j["judge"].get<std::string>(),
                   parse_event_field(j["event"].get<std::string>(), where), p, std::nullopt};
        if (j.contains("truth") && !j["truth"].is_null()) {
            if (j["truth"].is_boolean())
                f.truth = j["truth"].get<bool>();
            else
                f.truth = j["truth"].get<int>() != 0;
        }
        if (f.judge.empty()) throw DataError(where + ": empty judge id");
        out.push_back(std::move(f));
    }
    if (out.empty()) throw DataError(name + ": no forecasts");
    return out;
}

std::vector<Forecast> read_forecast_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return is_jsonl(path) ? read_forecasts_jsonl(in, path.filename().string())
                          : read_forecasts_csv(in, path.filename().string());
}

void write_forecast_file(const std::filesystem::path& path, std::span<const Forecast> fs) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    if (is_jsonl(path)) {
        for (const Forecast& f : fs) {
            json j;
            j["judge"] = f.judge;
            j["event"] = f.event.to_string();
            j["prob"] = f.p_hat;
            j["truth"] = f.truth.has_value() ? json(*f.truth ? 1 : 0) : json(nullptr);
            out << j.dump() << '\n';
        }
    } else {
        out << "judge,event,prob,truth\n";
        for (const Forecast& f : fs) {
            out << f.judge << ',' << f.event.to_string() << ','
                << format_probability(f.p_hat) << ',';
            if (f.truth.has_value()) out << (*f.truth ? '1' : '0');
            out << '\n';
        }
    }
    if (!out.good()) throw DataError("write failed for '" + path.string() + "'");
}

// --- synthetic panels ---------------------------------------------------------

namespace {

// Deterministic draws pinned to the mt19937_64 bit stream, independent of the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }
    bool coin(double p) { return uniform() < p; }

private:
    std::mt19937_64 eng_;
};

enum class Form { Basic, AndQ, AndNotQ, OrQ, OrNotQ };

struct DrawnEvent {
    Form form;
    std::size_t i = 0, j = 0;
};

std::size_t max_distinct_events(std::size_t n) {
    if (n < 2) return n;
    // p&q and p|q are unordered; p&!q and p|!q are ordered.
    return n + 3 * n * (n - 1);
}

EventExpr make_event(const DrawnEvent& d, const std::vector<std::string>& names) {
    EventExpr p = EventExpr::var(names[d.i]);
    switch (d.form) {
    case Form::Basic: return p;
    case Form::AndQ: return EventExpr::conjunction(p, EventExpr::var(names[d.j]));
    case Form::AndNotQ:
        return EventExpr::conjunction(p, EventExpr::negation(EventExpr::var(names[d.j])));
    case Form::OrQ: return EventExpr::disjunction(p, EventExpr::var(names[d.j]));
    case Form::OrNotQ:
        return EventExpr::disjunction(p, EventExpr::negation(EventExpr::var(names[d.j])));
    }
    return p;
}

// Exact probability of the event under an independent-marginal component.
double event_prob(const DrawnEvent& d, const std::vector<double>& theta) {
    const double a = theta[d.i];
    switch (d.form) {
    case Form::Basic: return a;
    case Form::AndQ: return a * theta[d.j];
    case Form::AndNotQ: return a * (1.0 - theta[d.j]);
    case Form::OrQ: return 1.0 - (1.0 - a) * (1.0 - theta[d.j]);
    case Form::OrNotQ: return 1.0 - (1.0 - a) * theta[d.j];
    }
    return a;
}

DrawnEvent draw_event(Rng& rng, std::size_t n, double basic_fraction) {
    DrawnEvent d;
    if (n < 2 || rng.coin(basic_fraction)) {
        d.form = Form::Basic;
        d.i = rng.below(n);
        return d;
    }
    switch (rng.below(4)) {
    case 0: d.form = Form::AndQ; break;
    case 1: d.form = Form::AndNotQ; break;
    case 2: d.form = Form::OrQ; break;
    default: d.form = Form::OrNotQ; break;
    }
    d.i = rng.below(n);
    d.j = rng.below(n - 1);
    if (d.j >= d.i) ++d.j;
    return d;
}

} // namespace

std::vector<Forecast> generate_panel(const GenParams& params) {
    if (params.n_vars == 0 || params.n_judges == 0 || params.events_per_judge == 0)
        throw UsageError("vars, judges and events per judge must be positive");
    if (params.noise < 0.0) throw UsageError("noise must be >= 0");
    if (!(params.basic_fraction >= 0.0 && params.basic_fraction <= 1.0))
        throw UsageError("basic fraction must lie in [0,1]");
    const std::size_t per_judge_cap = max_distinct_events(params.n_vars);
    if (params.events_per_judge > per_judge_cap)
        throw UsageError("only " + std::to_string(per_judge_cap) +
                         " distinct events exist over " + std::to_string(params.n_vars) +
                         " variables");
    if (params.distinct_across_judges &&
        params.n_judges * params.events_per_judge > per_judge_cap)
        throw UsageError("panel-wide distinct events exceed the " +
                         std::to_string(per_judge_cap) + " available");

    Rng rng(params.seed);

    std::vector<std::string> names(params.n_vars);
    for (std::size_t i = 0; i < params.n_vars; ++i) names[i] = "x" + std::to_string(i + 1);

    // Ground truth: one product distribution, or an even mixture of two.
    std::vector<std::vector<double>> components;
    components.emplace_back(params.n_vars);
    for (double& t : components[0]) t = 0.05 + 0.9 * rng.uniform();
    if (params.correlated) {
        components.emplace_back(params.n_vars);
        for (double& t : components[1]) t = 0.05 + 0.9 * rng.uniform();
    }

    // One truth realization.
    const std::size_t realized = params.correlated && rng.coin(0.5) ? 1 : 0;
    TruthAssignment world;
    for (std::size_t i = 0; i < params.n_vars; ++i)
        world[names[i]] = rng.coin(components[realized][i]);

    std::vector<Forecast> out;
    out.reserve(params.n_judges * params.events_per_judge);
    std::set<std::string> panel_keys;

    for (std::size_t jd = 0; jd < params.n_judges; ++jd) {
        const std::string judge = "j" + std::to_string(jd + 1);
        std::set<std::string> judge_keys;
        std::size_t attempts = 0;
        const std::size_t max_attempts = 1000 + 500 * params.events_per_judge;
        while (judge_keys.size() < params.events_per_judge) {
            if (++attempts > max_attempts)
                throw UsageError("could not draw enough distinct events; widen the variable pool");
            const DrawnEvent d = draw_event(rng, params.n_vars, params.basic_fraction);
            const EventExpr event = make_event(d, names);
            const std::string key = canonical_key(event);
            if (judge_keys.count(key)) continue;
            if (params.distinct_across_judges && panel_keys.count(key)) continue;
            judge_keys.insert(key);
            panel_keys.insert(key);

            double p_true = 0.0;
            for (const auto& theta : components) p_true += event_prob(d, theta);
            p_true /= static_cast<double>(components.size());

            double p_hat = p_true;
            if (params.noise > 0.0)
                p_hat += params.noise * (2.0 * rng.uniform() - 1.0);
            p_hat = std::clamp(p_hat, 0.0, 1.0);

            out.push_back(Forecast{judge, event, p_hat, evaluate(event, world)});
        }
    }
    return out;
}

// --- coherence report -----------------------------------------------------------

namespace {

CoherenceSection check_section(const std::string& label, std::span<const Forecast> fs,
                               const RunConfig& config) {
    CoherenceSection section;
    section.label = label;
    const Tolerances tols;

    const PooledForecastSet pooled = pool(fs);
    const SubsetDesign design = design_subsets(pooled, DesignStrategy::Neighborhood, config.cap);
    const std::vector<IndexedPolytope> sets = build_local_polytopes(pooled, design, config.cap);
    const ProbVector q = pooled.means();

    for (const auto& set : sets) {
        SubsetDiagnostic diag;
        ProbVector local(set.indices.size());
        for (std::size_t i = 0; i < set.indices.size(); ++i) {
            local[i] = q[set.indices[i]];
            diag.events.push_back(pooled.entries[set.indices[i]].event.to_string());
        }
        const ProbVector proj = project_onto(set.poly, local, tols);
        double d2 = 0.0;
        for (std::size_t i = 0; i < local.size(); ++i)
            d2 += (local[i] - proj[i]) * (local[i] - proj[i]);
        diag.residual = std::sqrt(d2);
        diag.coherent = diag.residual <= tols.membership;
        section.max_residual = std::max(section.max_residual, diag.residual);
        if (!diag.coherent) section.coherent = false;
        section.subsets.push_back(std::move(diag));
    }

    for (const PooledEntry& e : pooled.entries) {
        if (e.event.kind() != EventExpr::Kind::And) continue;
        for (const EventExpr& arg : {e.event.left(), e.event.right()}) {
            const std::size_t idx = pooled.find(canonical_key(arg));
            if (idx == SIZE_MAX) continue;
            const PooledEntry& conjunct = pooled.entries[idx];
            if (e.q_hat > conjunct.q_hat + 1e-12) {
                section.conjunction_fallacies.push_back(
                    FallacyFlag{e.event.to_string(), conjunct.event.to_string(), e.q_hat,
                                conjunct.q_hat});
            }
        }
    }
    return section;
}

} // namespace

std::vector<CoherenceSection> check_coherence(std::span<const Forecast> panel,
                                              const RunConfig& config) {
    if (panel.empty()) throw DataError("no forecasts");
    std::vector<std::pair<std::string, std::vector<Forecast>>> by_judge;
    for (const Forecast& f : panel) {
        auto it = std::find_if(by_judge.begin(), by_judge.end(),
                               [&](const auto& p) { return p.first == f.judge; });
        if (it == by_judge.end()) {
            by_judge.emplace_back(f.judge, std::vector<Forecast>{f});
        } else {
            it->second.push_back(f);
        }
    }
    std::vector<CoherenceSection> sections;
    for (const auto& [judge, fs] : by_judge)
        sections.push_back(check_section(judge, fs, config));
    sections.push_back(check_section("pooled", panel, config));
    return sections;
}

// --- benchmark -------------------------------------------------------------------

std::vector<BenchScale> default_bench_scales() {
    // Panel sizes follow the published datasets; every scale uses 30 basic
    // variables so that this many distinct two-literal events exist at all.
    return {
        {"HSTN", 17, 30, 34}, {"NBA1", 29, 30, 34}, {"FIN", 31, 30, 34},
        {"NBA2", 36, 30, 34}, {"STCK", 47, 30, 34},
    };
}

std::vector<BenchRow> run_bench(const BenchScale& scale, const RunConfig& config,
                                double noise) {
    GenParams gp;
    gp.n_vars = scale.n_vars;
    gp.n_judges = scale.n_judges;
    gp.events_per_judge = scale.events_per_judge;
    gp.noise = noise;
    gp.seed = config.seed;
    gp.distinct_across_judges = true;
    const std::vector<Forecast> panel = generate_panel(gp);

    const auto t0 = std::chrono::steady_clock::now();
    const PooledForecastSet pooled = pool(panel);
    const SubsetDesign design = design_subsets(pooled, config.design, config.cap);
    AggregateOptions opt = config.aggregate_options();
    const AggregationReport report = aggregate(pooled, design, opt);
    const auto t1 = std::chrono::steady_clock::now();
    const double elapsed_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0).count();

    std::vector<BenchRow> rows;
    for (int s = 0; s < report.iterations_run; ++s) {
        BenchRow row;
        row.dataset = scale.name;
        row.seed = config.seed;
        row.n_vars = scale.n_vars;
        row.n_judges = scale.n_judges;
        row.n_rows = panel.size();
        row.pooled_events = pooled.size();
        row.sweep = s + 1;
        row.brier_weighted_mean = report.sweeps[static_cast<std::size_t>(s)]
                                      .brier_weighted_mean.value_or(0.0);
        row.max_move = report.sweeps[static_cast<std::size_t>(s)].max_move;
        row.converged = report.converged && s + 1 == report.iterations_run;
        row.elapsed_ms = elapsed_ms;  // total aggregation wall time for the run
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
    out << "dataset,seed,n_vars,n_judges,n_rows,pooled_events,sweep,"
           "brier_weighted_mean,max_move,converged,total_elapsed_ms\n";
    for (const BenchRow& r : rows) {
        out << r.dataset << ',' << r.seed << ',' << r.n_vars << ',' << r.n_judges << ','
            << r.n_rows << ',' << r.pooled_events << ',' << r.sweep << ','
            << format_probability(r.brier_weighted_mean) << ','
            << format_probability(r.max_move) << ',' << (r.converged ? 1 : 0) << ','
            << format_probability(r.elapsed_ms) << '\n';
    }
}

// --- command layer ------------------------------------------------------------------

namespace {

json report_to_json(const AggregationReport& report, const PooledForecastSet& pooled,
                    const RunConfig& config) {
    json j;
    j["design"] = std::string(design_strategy_name(config.design));
    j["method"] = std::string(method_name(config.method));
    j["converged"] = report.converged;
    j["iterations_run"] = report.iterations_run;
    json sweeps = json::array();
    for (const SweepStats& s : report.sweeps) {
        json sj;
        sj["max_move"] = s.max_move;
        sj["max_residual"] = s.max_residual;
        if (s.brier_weighted_total) {
            sj["brier_weighted_total"] = *s.brier_weighted_total;
            sj["brier_weighted_mean"] = *s.brier_weighted_mean;
        }
        sweeps.push_back(std::move(sj));
    }
    j["sweeps"] = std::move(sweeps);
    json events = json::array();
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        json ej;
        ej["event"] = pooled.entries[i].event.to_string();
        ej["input_mean"] = pooled.entries[i].q_hat;
        ej["probability"] = report.final[i];
        ej["weight"] = pooled.entries[i].weight;
        events.push_back(std::move(ej));
    }
    j["events"] = std::move(events);
    return j;
}

void write_aggregate_csv(std::ostream& out, const PooledForecastSet& pooled,
                         const ProbVector& final) {
    out << "event,probability,weight\n";
    for (std::size_t i = 0; i < pooled.size(); ++i)
        out << pooled.entries[i].event.to_string() << ',' << format_probability(final[i])
            << ',' << format_probability(pooled.entries[i].weight) << '\n';
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write '" + path.string() + "'");
    return f;
}

json sections_to_json(std::span<const CoherenceSection> sections) {
    json j = json::array();
    for (const CoherenceSection& s : sections) {
        json sj;
        sj["label"] = s.label;
        sj["coherent"] = s.coherent;
        sj["max_residual"] = s.max_residual;
        json subsets = json::array();
        for (const SubsetDiagnostic& d : s.subsets) {
            json dj;
            dj["events"] = d.events;
            dj["residual"] = d.residual;
            dj["coherent"] = d.coherent;
            subsets.push_back(std::move(dj));
        }
        sj["subsets"] = std::move(subsets);
        json flags = json::array();
        for (const FallacyFlag& f : s.conjunction_fallacies) {
            json fj;
            fj["conjunction"] = f.conjunction;
            fj["conjunct"] = f.conjunct;
            fj["p_conjunction"] = f.p_conjunction;
            fj["p_conjunct"] = f.p_conjunct;
            flags.push_back(std::move(fj));
        }
        sj["conjunction_fallacies"] = std::move(flags);
        j.push_back(std::move(sj));
    }
    return j;
}

void write_score_csv(std::ostream& out, std::span<const ScoreReport> reports) {
    out << "case,judge,n_forecasts,brier_mean,brier_total,slope\n";
    for (const ScoreReport& rep : reports) {
        for (const JudgeScore& js : rep.judges) {
            out << eval_case_name(rep.which) << ',' << js.judge << ',' << js.n_forecasts << ','
                << format_probability(js.brier_mean) << ','
                << format_probability(js.brier_total) << ',';
            if (js.slope) out << format_probability(*js.slope);
            out << '\n';
        }
        out << eval_case_name(rep.which) << ",PANEL,," << format_probability(rep.panel_brier_mean)
            << ",,";
        if (rep.panel_slope) out << format_probability(*rep.panel_slope);
        out << '\n';
    }
}

json scores_to_json(std::span<const ScoreReport> reports) {
    json j = json::array();
    for (const ScoreReport& rep : reports) {
        json rj;
        rj["case"] = std::string(eval_case_name(rep.which));
        rj["panel_brier_mean"] = rep.panel_brier_mean;
        if (rep.panel_slope) rj["panel_slope"] = *rep.panel_slope;
        rj["judge_weighting"] = rep.judge_weighting;
        json judges = json::array();
        for (const JudgeScore& js : rep.judges) {
            json jj;
            jj["judge"] = js.judge;
            jj["n_forecasts"] = js.n_forecasts;
            jj["brier_mean"] = js.brier_mean;
            jj["brier_total"] = js.brier_total;
            if (js.slope) jj["slope"] = *js.slope;
            judges.push_back(std::move(jj));
        }
        rj["judges"] = std::move(judges);
        j.push_back(std::move(rj));
    }
    return j;
}

} // namespace

int cmd_aggregate(const std::filesystem::path& input, const RunConfig& config,
                  const std::filesystem::path& out_path, std::ostream& out) {
    const std::vector<Forecast> panel = read_forecast_file(input);
    const PooledForecastSet pooled = pool(panel);
    const SubsetDesign design = design_subsets(pooled, config.design, config.cap);
    const AggregationReport report = aggregate(pooled, design, config.aggregate_options());

    if (out_path.empty()) {
        write_aggregate_csv(out, pooled, report.final);
    } else {
        auto f = open_out(out_path);
        write_aggregate_csv(f, pooled, report.final);
        auto rep_path = out_path;
        rep_path += ".report.json";
        auto rf = open_out(rep_path);
        rf << report_to_json(report, pooled, config).dump(2) << '\n';
    }
    return 0;
}

int cmd_check(const std::filesystem::path& input, const RunConfig& config,
              const std::filesystem::path& out_path, std::ostream& out) {
    const std::vector<Forecast> panel = read_forecast_file(input);
    const std::vector<CoherenceSection> sections = check_coherence(panel, config);
    const json j = sections_to_json(sections);
    if (out_path.empty()) {
        out << j.dump(2) << '\n';
    } else {
        auto f = open_out(out_path);
        f << j.dump(2) << '\n';
    }
    return 0;
}

int cmd_score(const std::filesystem::path& input, const RunConfig& config,
              const std::filesystem::path& out_path, std::ostream& out) {
    const std::vector<Forecast> panel = read_forecast_file(input);
    EvalConfig ec;
    ec.design = config.design;
    ec.options = config.aggregate_options();
    const std::vector<ScoreReport> reports = evaluate_cases(panel, ec);
    if (out_path.empty()) {
        write_score_csv(out, reports);
    } else {
        auto f = open_out(out_path);
        write_score_csv(f, reports);
        auto jp = out_path;
        jp += ".json";
        auto jf = open_out(jp);
        jf << scores_to_json(reports).dump(2) << '\n';
    }
    return 0;
}

int cmd_gen(const GenParams& params, const std::filesystem::path& out_path, std::ostream& out) {
    const std::vector<Forecast> panel = generate_panel(params);
    if (out_path.empty()) {
        out << "judge,event,prob,truth\n";
        for (const Forecast& f : panel) {
            out << f.judge << ',' << f.event.to_string() << ',' << format_probability(f.p_hat)
                << ',' << (*f.truth ? '1' : '0') << '\n';
        }
    } else {
        write_forecast_file(out_path, panel);
    }
    return 0;
}

int cmd_bench(const RunConfig& config, std::size_t n_seeds, double noise,
              const std::filesystem::path& out_path, std::ostream& out) {
    if (n_seeds == 0) throw UsageError("need at least one seed");
    std::vector<BenchRow> rows;
    for (const BenchScale& scale : default_bench_scales()) {
        for (std::size_t s = 0; s < n_seeds; ++s) {
            RunConfig c = config;
            c.seed = config.seed + s;
            const std::vector<BenchRow> r = run_bench(scale, c, noise);
            rows.insert(rows.end(), r.begin(), r.end());
        }
    }
    if (out_path.empty()) {
        write_bench_csv(out, rows);
    } else {
        auto f = open_out(out_path);
        write_bench_csv(f, rows);
    }
    return 0;
}

} // namespace capagg
