#ifndef BNMC_ORACLE_HPP
#define BNMC_ORACLE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "bnmc/graph.hpp"
#include "bnmc/prior.hpp"
#include "bnmc/queries.hpp"
#include "bnmc/scoring.hpp"

namespace bnmc {

inline constexpr std::size_t kMaxEnumerationNodes = 5;

// Every admissible DAG on prior.n_nodes() <= 5 nodes exactly once, built
// from per-node admissible parent sets filtered for acyclicity.
std::vector<Dag> enumerate_dags(const StructPrior& prior);

/// Exact structure posterior under the uniform prior over the admissible set:
/// p(G|D) proportional to exp(total_score(G)).
struct ExactPosterior {
    std::vector<std::string> names;
    std::vector<Dag> dags;
    std::vector<double> log_scores;
    std::vector<double> probabilities;
    double log_normalizer = 0.0;

    double expectation(const Feature& feature) const;
    // P(from -> to), indexed [from * n + to].
    std::vector<double> arc_probabilities() const;
};

ExactPosterior exact_posterior(const ScoreCache& cache);

// Mirrors the query report layout with "method": "exact": all arcs, all
// adjacencies and the DAG list sorted by posterior.
std::string exact_report_json(const ExactPosterior& posterior);

}  // namespace bnmc

#endif  // BNMC_ORACLE_HPP
