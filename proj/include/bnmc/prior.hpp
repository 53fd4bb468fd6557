#ifndef BNMC_PRIOR_HPP
#define BNMC_PRIOR_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bnmc/bits.hpp"
#include "bnmc/graph.hpp"

namespace bnmc {

enum class PriorKind { UniformOverAdmissibleDags };

/// Structural prior: the support set of admissible DAGs.
///
/// `banned(v)` holds the parents v may never have and `required(v)` the
/// parents it must always have. A DAG is admissible iff every parent set
/// avoids the ban mask, contains the retain mask and has at most
/// `max_parents` members. Within the support the prior is uniform.
class StructPrior {
public:
    StructPrior() = default;
    StructPrior(std::size_t n_nodes, std::size_t max_parents);
    StructPrior(std::size_t n_nodes, std::size_t max_parents, std::vector<NodeSet> banned,
                std::vector<NodeSet> required);

    static StructPrior unconstrained(std::size_t n_nodes) {
        return StructPrior(n_nodes, n_nodes == 0 ? 0 : n_nodes - 1);
    }

    std::size_t n_nodes() const { return banned_.size(); }
    std::size_t max_parents() const { return max_parents_; }
    PriorKind kind() const { return PriorKind::UniformOverAdmissibleDags; }

    NodeSet banned(std::size_t v) const { return banned_[v]; }
    NodeSet required(std::size_t v) const { return required_[v]; }
    NodeSet allowed(std::size_t v) const;

    bool admits_parent_set(std::size_t v, NodeSet parents) const;
    bool admits(const Dag& dag) const;

    // The DAG made of the retained edges only.
    Dag retained_dag() const;

    // Number of admissible parent sets of v, ignoring acyclicity.
    std::size_t parent_set_count(std::size_t v) const;

    // Every admissible parent set of v, smallest sets first.
    std::vector<NodeSet> admissible_parent_sets(std::size_t v) const;

    bool operator==(const StructPrior&) const = default;

private:
    std::size_t max_parents_ = 0;
    std::vector<NodeSet> banned_;
    std::vector<NodeSet> required_;
};

// Log prior ratio ln p(to) - ln p(from); the hook non-uniform priors plug into.
using LogPriorRatio = std::function<double(const Dag& from, const Dag& to)>;

// 0 for any pair: both endpoints of a proposal are admissible by construction.
LogPriorRatio uniform_log_prior_ratio();

// Parses "a->b,c->d" into (parent, child) index pairs.
std::vector<std::pair<std::size_t, std::size_t>> parse_edge_list(
    const std::string& text, const std::vector<std::string>& names);

}  // namespace bnmc

#endif  // BNMC_PRIOR_HPP
