#ifndef BNMC_QUERIES_HPP
#define BNMC_QUERIES_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bnmc/graph.hpp"
#include "bnmc/sampler.hpp"

namespace bnmc {

// A 0/1 structural feature of a DAG.
using Feature = std::function<bool(const Dag&)>;

Feature directed_arc(std::size_t from, std::size_t to);
Feature undirected_adjacency(std::size_t a, std::size_t b);

enum class QueryKind { DirectedArc, UndirectedAdjacency, AllArcs, AllAdjacencies, DagFrequency, NormalizedScoreTrace };

struct FeatureQuery {
    QueryKind kind = QueryKind::AllArcs;
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t top_k = 0;
    bool sorted = false;

    // arc:a->b, adj:a-b, all-arcs, all-adj, dag-freq:k, score-trace[:sorted]
    static FeatureQuery parse(std::string_view text, const std::vector<std::string>& names);
};

struct DagCount {
    std::string dag_hex;
    std::size_t count = 0;
    double log_score = 0.0;
};

struct QueryReport {
    std::string feature;
    std::string method = "mcmc";
    std::size_t sample_size = 0;
    std::vector<std::pair<std::string, double>> estimates;
    std::vector<DagCount> dags;   // DagFrequency only
    std::vector<double> values;   // NormalizedScoreTrace only
};

// Monte Carlo posterior mean of f over the retained samples.
double estimate(const Trace& trace, const Feature& feature);

QueryReport estimate(const Trace& trace, const FeatureQuery& query);

// The top_k most visited DAGs, counts descending (ties by encoding).
// top_k == 0 keeps every distinct DAG.
QueryReport dag_frequency(const Trace& trace, std::size_t top_k);

// log_score - max(log_score) per record; ascending when sorted.
std::vector<double> normalized_score_trace(const Trace& trace, bool sorted);

std::string report_to_json(const QueryReport& report);
std::string report_to_csv(const QueryReport& report);

}  // namespace bnmc

#endif  // BNMC_QUERIES_HPP
