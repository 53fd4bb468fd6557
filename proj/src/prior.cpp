#include "bnmc/prior.hpp"

#include <algorithm>
#include <string_view>

namespace bnmc {

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

StructPrior::StructPrior(std::size_t n_nodes, std::size_t max_parents)
    : StructPrior(n_nodes, max_parents, std::vector<NodeSet>(n_nodes, 0), std::vector<NodeSet>(n_nodes, 0)) {}

StructPrior::StructPrior(std::size_t n_nodes, std::size_t max_parents, std::vector<NodeSet> banned,
                         std::vector<NodeSet> required)
    : max_parents_(max_parents), banned_(std::move(banned)), required_(std::move(required)) {
    if (n_nodes > kMaxNodes) throw UsageError("at most 64 nodes are supported");
    if (banned_.size() != n_nodes || required_.size() != n_nodes)
        throw UsageError("ban/retain masks must have one entry per node");
    if (n_nodes > 0 && max_parents_ > n_nodes - 1)
        throw UsageError("max_parents " + std::to_string(max_parents_) + " exceeds n_nodes - 1 = " +
                         std::to_string(n_nodes - 1));
    const NodeSet all = full_set(n_nodes);
    for (std::size_t v = 0; v < n_nodes; ++v) {
        if ((banned_[v] | required_[v]) & ~all) throw UsageError("ban/retain mask names an unknown node");
        if (banned_[v] & required_[v]) throw UsageError("an edge cannot be both banned and retained");
        if (contains(required_[v], v)) throw UsageError("retained self-loop");
        if (set_size(required_[v]) > max_parents_)
            throw UsageError("retained edges exceed max_parents at node " + std::to_string(v));
    }
    if (!is_acyclic(required_)) throw UsageError("retained edges contain a cycle");
}

NodeSet StructPrior::allowed(std::size_t v) const {
    return full_set(n_nodes()) & ~bit(v) & ~banned_[v];
}

bool StructPrior::admits_parent_set(std::size_t v, NodeSet parents) const {
    return (parents & ~allowed(v)) == 0 && (parents & required_[v]) == required_[v] &&
           set_size(parents) <= max_parents_;
}

bool StructPrior::admits(const Dag& dag) const {
    if (dag.n_nodes() != n_nodes()) return false;
    for (std::size_t v = 0; v < n_nodes(); ++v)
        if (!admits_parent_set(v, dag.parents(v))) return false;
    return true;
}

Dag StructPrior::retained_dag() const { return Dag(required_); }

std::size_t StructPrior::parent_set_count(std::size_t v) const {
    const std::size_t free = set_size(allowed(v) & ~required_[v]);
    const std::size_t fixed = set_size(required_[v]);
    std::size_t total = 0;
    for (std::size_t k = 0; k + fixed <= max_parents_ && k <= free; ++k) total += binomial(free, k);
    return total;
}

std::vector<NodeSet> StructPrior::admissible_parent_sets(std::size_t v) const {
    const std::vector<std::size_t> free = members(allowed(v) & ~required_[v]);
    const std::size_t budget = max_parents_ - set_size(required_[v]);
    std::vector<NodeSet> out;
    out.reserve(parent_set_count(v));
    // Combinations of each size in lexicographic order of the free members.
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k <= std::min(budget, free.size()); ++k) {
        idx.resize(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            NodeSet s = required_[v];
            for (std::size_t i : idx) s |= bit(free[i]);
            out.push_back(s);
            std::size_t i = k;
            while (i > 0 && idx[i - 1] == free.size() - k + (i - 1)) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

LogPriorRatio uniform_log_prior_ratio() {
    return [](const Dag&, const Dag&) { return 0.0; };
}

std::vector<std::pair<std::size_t, std::size_t>> parse_edge_list(const std::string& text,
                                                                 const std::vector<std::string>& names) {
    auto lookup = [&](std::string_view name) -> std::size_t {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw UsageError("unknown node '" + std::string(name) + "' in edge list");
        return static_cast<std::size_t>(it - names.begin());
    };
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = trim(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        if (item.empty()) continue;
        const auto arrow = item.find("->");
        if (arrow == std::string_view::npos) throw UsageError("expected 'from->to', got '" + std::string(item) + "'");
        edges.emplace_back(lookup(trim(item.substr(0, arrow))), lookup(trim(item.substr(arrow + 2))));
    }
    return edges;
}

}  // namespace bnmc
