#ifndef BNMC_SAMPLER_HPP
#define BNMC_SAMPLER_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bnmc/graph.hpp"
#include "bnmc/moves.hpp"
#include "bnmc/prior.hpp"
#include "bnmc/rng.hpp"
#include "bnmc/scoring.hpp"

namespace bnmc {

enum class StartKind { Empty, Random, Given };

struct ChainConfig {
    std::size_t steps = 100'000;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    StartKind start = StartKind::Empty;
    std::optional<Dag> start_dag;  // required when start == Given
    MoveWeights weights;
    std::size_t burn_in = 0;
    std::size_t thin = 1;

    void validate() const;
};

struct TraceRecord {
    std::size_t step = 0;
    MoveKind move = MoveKind::AddEdge;
    bool accepted = false;
    bool degenerate = false;
    double log_score = 0.0;
    std::string dag_hex;
};

struct TraceHeader {
    std::size_t n_nodes = 0;
    std::vector<std::string> nodes;
    std::string rng{Rng::kName};
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    double ess = 1.0;
    MoveWeights weights;
    std::size_t steps = 0;  // total steps run, including burn-in and thinned ones
    std::size_t burn_in = 0;
    std::size_t thin = 1;
};

/// Retained chain states: record t holds the DAG after step `step`.
struct Trace {
    TraceHeader header;
    std::vector<TraceRecord> records;

    Dag dag(std::size_t k) const { return decode_dag(records[k].dag_hex, header.n_nodes); }
    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// MH acceptance probability min(1, exp(log_ratio)).
double acceptance_probability(double log_ratio);

// Accept iff ln(u) < log_ratio; u must lie in (0, 1).
bool accept_move(double log_ratio, double u);

// Random permutation consistent with the retained edges, then a uniformly
// chosen admissible parent set per node among its predecessors. A dispersion
// device only: not uniform over DAGs.
Dag random_start(const ScoreCache& cache, Rng& rng);

// Metropolis-Hastings over DAGs. The same (cache, config) always yields the
// same trace.
Trace run_chain(const ScoreCache& cache, const StructPrior& prior, const ChainConfig& config,
                const LogPriorRatio& log_prior_ratio = uniform_log_prior_ratio());

// Continues from the last retained DAG with a fresh stream seeded by `seed`,
// keeping the trace's thinning.
Trace resume_chain(const Trace& trace, const ScoreCache& cache, const StructPrior& prior, std::size_t extra_steps,
                   std::uint64_t seed, const LogPriorRatio& log_prior_ratio = uniform_log_prior_ratio());

struct TraceCheck {
    bool acyclic = true;
    bool admissible = true;
    bool scores_match = true;
    double max_score_error = 0.0;
    std::size_t first_bad_record = 0;

    bool ok() const { return acyclic && admissible && scores_match; }
};

// Re-validates every record against the cache within `tolerance`.
TraceCheck check_trace(const Trace& trace, const ScoreCache& cache, const StructPrior& prior,
                       double tolerance = 1e-9);

// CSV with "# key=value" header lines, then
// step,move,accepted,degenerate,log_score,dag_hex.
void write_trace_csv(std::ostream& out, const Trace& trace);
Trace parse_trace_csv(std::istream& in);
Trace read_trace(const std::filesystem::path& path);

}  // namespace bnmc

#endif  // BNMC_SAMPLER_HPP
