#ifndef BNMC_SCORING_HPP
#define BNMC_SCORING_HPP

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnmc/data.hpp"
#include "bnmc/graph.hpp"
#include "bnmc/prior.hpp"

namespace bnmc {

// ln Gamma(x) for x > 0: upward recurrence to x >= 10, then the Stirling
// series through the z^-11 term.
double log_gamma(double x);

// BDeu log marginal likelihood of one family from its contingency counts.
double bdeu_score(const ContingencyTable& table, double ess);

double local_score(const Dataset& data, std::size_t child, NodeSet parents, double ess);

// Requested parent set is not stored: it violates the cache's prior.
class CacheMiss : public InputError {
public:
    using InputError::InputError;
};

class CacheBudgetExceeded : public UsageError {
public:
    using UsageError::UsageError;
};

/// Log local scores for every admissible (node, parent set) pair under a
/// StructPrior. Immutable once built.
class ScoreCache {
public:
    struct Entry {
        NodeSet parents;
        double score;
    };

    ScoreCache() = default;
    // Entries per node need not be sorted; completeness against the prior is
    // checked.
    ScoreCache(StructPrior prior, double ess, std::vector<std::string> names,
               std::vector<std::vector<Entry>> entries);

    std::size_t n_nodes() const { return entries_.size(); }
    std::size_t max_parents() const { return prior_.max_parents(); }
    double ess() const { return ess_; }
    const StructPrior& prior() const { return prior_; }
    const std::vector<std::string>& names() const { return names_; }

    // Sorted by parent mask.
    std::span<const Entry> entries(std::size_t v) const { return entries_[v]; }
    std::size_t entry_count() const;

    std::optional<double> find(std::size_t v, NodeSet parents) const;
    double score(std::size_t v, NodeSet parents) const;

private:
    StructPrior prior_;
    double ess_ = 1.0;
    std::vector<std::string> names_;
    std::vector<std::vector<Entry>> entries_;
};

struct CacheBuildOptions {
    std::size_t entry_budget = 10'000'000;
    unsigned threads = 1;
};

ScoreCache build_cache(const Dataset& data, const StructPrior& prior, double ess,
                       const CacheBuildOptions& options = {});

// Every admissible entry set to `value`: a flat target over the support.
ScoreCache constant_cache(const StructPrior& prior, double value = 0.0, std::vector<std::string> names = {});

// Sum of cached local scores; throws CacheMiss for an uncached parent set.
double total_score(const Dag& dag, const ScoreCache& cache);

// {"n", "ess", "max_parents", "nodes", "ban", "retain", "scores": {"0": {"": s, "1,3": s}}}
std::string cache_to_json(const ScoreCache& cache);
ScoreCache cache_from_json(const std::string& text);
void write_cache(const std::filesystem::path& path, const ScoreCache& cache);
ScoreCache read_cache(const std::filesystem::path& path);

std::string parent_set_key(NodeSet parents);
NodeSet parse_parent_set_key(const std::string& key);

}  // namespace bnmc

#endif  // BNMC_SCORING_HPP
