#include "bnmc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace bnmc {

namespace {

// Cartesian product of per-node options, depth-first, keeping acyclic leaves.
void enumerate_from(std::size_t v, const std::vector<std::vector<NodeSet>>& options, std::vector<NodeSet>& parents,
                    std::vector<Dag>& out) {
    const std::size_t n = options.size();
    if (v == n) {
        if (is_acyclic(parents)) out.emplace_back(parents);
        return;
    }
    for (NodeSet s : options[v]) {
        parents[v] = s;
        enumerate_from(v + 1, options, parents, out);
    }
    parents[v] = 0;
}

}  // namespace

std::vector<Dag> enumerate_dags(const StructPrior& prior) {
    const std::size_t n = prior.n_nodes();
    if (n > kMaxEnumerationNodes)
        throw UsageError("exact enumeration supports at most " + std::to_string(kMaxEnumerationNodes) +
                         " nodes, got " + std::to_string(n));
    std::vector<std::vector<NodeSet>> options(n);
    for (std::size_t v = 0; v < n; ++v) options[v] = prior.admissible_parent_sets(v);
    std::vector<NodeSet> parents(n, 0);
    std::vector<Dag> out;
    enumerate_from(0, options, parents, out);
    return out;
}

ExactPosterior exact_posterior(const ScoreCache& cache) {
    ExactPosterior post;
    post.names = cache.names();
    post.dags = enumerate_dags(cache.prior());
    post.log_scores.reserve(post.dags.size());
    for (const Dag& g : post.dags) post.log_scores.push_back(total_score(g, cache));

    const double max_score = *std::max_element(post.log_scores.begin(), post.log_scores.end());
    double sum = 0.0;
    for (double s : post.log_scores) sum += std::exp(s - max_score);
    post.log_normalizer = max_score + std::log(sum);
    post.probabilities.reserve(post.dags.size());
    for (double s : post.log_scores) post.probabilities.push_back(std::exp(s - post.log_normalizer));
    return post;
}

double ExactPosterior::expectation(const Feature& feature) const {
    double e = 0.0;
    for (std::size_t k = 0; k < dags.size(); ++k)
        if (feature(dags[k])) e += probabilities[k];
    return e;
}

std::vector<double> ExactPosterior::arc_probabilities() const {
    const std::size_t n = names.size();
    std::vector<double> arcs(n * n, 0.0);
    for (std::size_t k = 0; k < dags.size(); ++k)
        for (std::size_t c = 0; c < n; ++c)
            for_each_member(dags[k].parents(c), [&](std::size_t p) { arcs[p * n + c] += probabilities[k]; });
    return arcs;
}

std::string exact_report_json(const ExactPosterior& posterior) {
    using ojson = nlohmann::ordered_json;
    const std::size_t n = posterior.names.size();
    const auto& names = posterior.names;
    const auto arcs = posterior.arc_probabilities();

    ojson doc;
    doc["method"] = "exact";
    doc["n_dags"] = posterior.dags.size();
    doc["log_normalizer"] = posterior.log_normalizer;
    ojson arc_obj = ojson::object();
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t c = 0; c < n; ++c)
            if (p != c) arc_obj[names[p] + "->" + names[c]] = arcs[p * n + c];
    doc["arcs"] = std::move(arc_obj);
    ojson adj_obj = ojson::object();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) adj_obj[names[a] + "-" + names[b]] = arcs[a * n + b] + arcs[b * n + a];
    doc["adjacencies"] = std::move(adj_obj);

    std::vector<std::size_t> order(posterior.dags.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return posterior.probabilities[x] > posterior.probabilities[y];
    });
    ojson dags = ojson::array();
    for (std::size_t k : order) {
        ojson row;
        row["dag_hex"] = encode_dag(posterior.dags[k]);
        row["posterior"] = posterior.probabilities[k];
        row["log_score"] = posterior.log_scores[k];
        dags.push_back(std::move(row));
    }
    doc["dags"] = std::move(dags);
    return doc.dump(2) + "\n";
}

}  // namespace bnmc
