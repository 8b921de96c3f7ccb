#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "capagg/scoring.hpp"

namespace capagg {

// Shared run settings for the command-layer entry points.
struct RunConfig {
    DesignStrategy design = DesignStrategy::Neighborhood;
    Method method = Method::Cyclic;
    int max_sweeps = 50;
    double tol = 1e-7;
    std::uint64_t seed = 0;
    bool parallel = false;
    std::size_t cap = kDefaultSupportCap;

    AggregateOptions aggregate_options() const;
};

// Forecast files are CSV with header `judge,event,prob,truth` (truth 0, 1 or
// empty) or JSON lines with the same fields (extension .jsonl / .ndjson).
// Probabilities are written in shortest round-trip form, so reading back
// reproduces the exact double. Errors carry 1-based row numbers.
std::vector<Forecast> read_forecast_file(const std::filesystem::path& path);
std::vector<Forecast> read_forecasts_csv(std::istream& in, const std::string& name);
std::vector<Forecast> read_forecasts_jsonl(std::istream& in, const std::string& name);
void write_forecast_file(const std::filesystem::path& path, std::span<const Forecast> fs);

// Shortest decimal form that parses back to the same double.
std::string format_probability(double p);

// --- synthetic panels --------------------------------------------------------

struct GenParams {
    std::size_t n_vars = 10;
    std::size_t n_judges = 30;
    std::size_t events_per_judge = 34;
    double noise = 0.15;       // half-width of the additive perturbation
    std::uint64_t seed = 0;
    double basic_fraction = 10.0 / 34.0;  // share of basic events per judge
    bool correlated = false;   // mix two product distributions instead of one
    bool distinct_across_judges = false;  // no event repeats anywhere in the panel
};

// Samples a ground-truth joint distribution over x1..xn (independent
// marginals by default), one truth realization, and per judge a set of
// distinct events of the forms p, p&q, p&!q, p|q, p|!q whose forecast is the
// event's true probability plus truncated uniform noise. Deterministic for a
// fixed seed.
std::vector<Forecast> generate_panel(const GenParams& params);

// --- coherence report ----------------------------------------------------------

struct SubsetDiagnostic {
    std::vector<std::string> events;
    double residual = 0.0;  // Euclidean distance to the local coherence set
    bool coherent = false;
};

struct FallacyFlag {
    std::string conjunction;
    std::string conjunct;
    double p_conjunction = 0.0;
    double p_conjunct = 0.0;
};

struct CoherenceSection {
    std::string label;  // judge id, or "pooled"
    std::vector<SubsetDiagnostic> subsets;
    std::vector<FallacyFlag> conjunction_fallacies;
    bool coherent = true;
    double max_residual = 0.0;
};

std::vector<CoherenceSection> check_coherence(std::span<const Forecast> panel,
                                              const RunConfig& config);

// --- benchmark -----------------------------------------------------------------

struct BenchScale {
    std::string name;
    std::size_t n_judges = 0;
    std::size_t n_vars = 0;
    std::size_t events_per_judge = 34;
};

// The five panel scales the convergence/timing experiment runs at.
std::vector<BenchScale> default_bench_scales();

struct BenchRow {
    std::string dataset;
    std::uint64_t seed = 0;
    std::size_t n_vars = 0;
    std::size_t n_judges = 0;
    std::size_t n_rows = 0;
    std::size_t pooled_events = 0;
    int sweep = 0;                 // 1-based
    double brier_weighted_mean = 0.0;
    double max_move = 0.0;
    bool converged = false;        // convergence reached at or before this sweep
    double elapsed_ms = 0.0;       // cumulative aggregation time at this sweep
};

std::vector<BenchRow> run_bench(const BenchScale& scale, const RunConfig& config,
                                double noise = 0.15);
void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

// --- command layer ---------------------------------------------------------------
// Thin wrappers the CLI dispatches to; `out` receives whatever would go to
// stdout when no --out path is given. All of them throw on bad input.

int cmd_aggregate(const std::filesystem::path& input, const RunConfig& config,
                  const std::filesystem::path& out_path, std::ostream& out);
int cmd_check(const std::filesystem::path& input, const RunConfig& config,
              const std::filesystem::path& out_path, std::ostream& out);
int cmd_score(const std::filesystem::path& input, const RunConfig& config,
              const std::filesystem::path& out_path, std::ostream& out);
int cmd_gen(const GenParams& params, const std::filesystem::path& out_path, std::ostream& out);
int cmd_bench(const RunConfig& config, std::size_t n_seeds, double noise,
              const std::filesystem::path& out_path, std::ostream& out);

} // namespace capagg
