#include "bnmc/moves.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bnmc {

std::string_view to_string(MoveKind kind) {
    switch (kind) {
        case MoveKind::AddEdge: return "add";
        case MoveKind::DeleteEdge: return "delete";
        case MoveKind::ReverseEdge: return "reverse";
        case MoveKind::Rev: return "rev";
        case MoveKind::Mbr: return "mbr";
    }
    return "?";
}

MoveKind parse_move_kind(std::string_view text) {
    for (MoveKind k : {MoveKind::AddEdge, MoveKind::DeleteEdge, MoveKind::ReverseEdge, MoveKind::Rev, MoveKind::Mbr})
        if (to_string(k) == text) return k;
    throw InputError("unknown move kind '" + std::string(text) + "'");
}

MoveWeights MoveWeights::parse(std::string_view text) {
    MoveWeights w{0.0, 0.0, 0.0};
    bool seen[3] = {false, false, false};
    std::string item;
    std::stringstream ss{std::string(text)};
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("move weight '" + item + "' is not key=value");
        const std::string key = item.substr(0, eq);
        double value = 0.0;
        try {
            std::size_t pos = 0;
            value = std::stod(item.substr(eq + 1), &pos);
            if (pos != item.size() - eq - 1) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("move weight '" + item + "' has a non-numeric value");
        }
        int slot = key == "single" ? 0 : key == "rev" ? 1 : key == "mbr" ? 2 : -1;
        if (slot < 0) throw UsageError("unknown move kind '" + key + "' (expected single, rev or mbr)");
        if (seen[slot]) throw UsageError("move weight '" + key + "' given twice");
        seen[slot] = true;
        (slot == 0 ? w.single : slot == 1 ? w.rev : w.mbr) = value;
    }
    const double sum = w.single + w.rev + w.mbr;
    if (w.single < 0 || w.rev < 0 || w.mbr < 0 || !std::isfinite(sum))
        throw UsageError("move weights must be nonnegative");
    if (std::abs(sum - 1.0) > 1e-6) throw UsageError("move weights must sum to 1");
    w.single /= sum;
    w.rev /= sum;
    w.mbr /= sum;
    return w;
}

std::string MoveWeights::to_string() const {
    std::ostringstream out;
    out.precision(17);
    out << "single=" << single << ",rev=" << rev << ",mbr=" << mbr;
    return out.str();
}

void MoveWeights::validate() const {
    if (single < 0 || rev < 0 || mbr < 0) throw UsageError("move weights must be nonnegative");
    if (std::abs(single + rev + mbr - 1.0) > 1e-12) throw UsageError("move weights must sum to 1");
}

MoveFamily draw_family(const MoveWeights& weights, Rng& rng) {
    const double u = rng.uniform();
    if (u < weights.single) return MoveFamily::SingleEdge;
    if (u < weights.single + weights.rev) return MoveFamily::Rev;
    if (weights.mbr > 0.0) return MoveFamily::Mbr;
    return weights.rev > 0.0 ? MoveFamily::Rev : MoveFamily::SingleEdge;
}

ParentSetDistribution::ParentSetDistribution(const ScoreCache& cache, std::size_t node, NodeSet forbidden,
                                             NodeSet must_contain) {
    double max_score = -std::numeric_limits<double>::infinity();
    for (const auto& e : cache.entries(node)) {
        if ((e.parents & forbidden) != 0 || (e.parents & must_contain) != must_contain) continue;
        candidates_.push_back(&e);
        max_score = std::max(max_score, e.score);
    }
    weights_.reserve(candidates_.size());
    for (const auto* e : candidates_) {
        weights_.push_back(std::exp(e->score - max_score));
        weight_total_ += weights_.back();
    }
    log_z_ = candidates_.empty() ? -std::numeric_limits<double>::infinity() : max_score + std::log(weight_total_);
}

NodeSet ParentSetDistribution::sample(Rng& rng) const {
    if (candidates_.empty()) throw std::logic_error("sampling from an empty parent-set distribution");
    const double target = rng.uniform() * weight_total_;
    double acc = 0.0;
    for (std::size_t k = 0; k < candidates_.size(); ++k) {
        acc += weights_[k];
        if (target < acc) return candidates_[k]->parents;
    }
    // Rounding can leave target == total; take the last candidate with mass.
    for (std::size_t k = candidates_.size(); k-- > 0;)
        if (weights_[k] > 0.0) return candidates_[k]->parents;
    return candidates_.back()->parents;
}

double ParentSetDistribution::log_probability(NodeSet parents) const {
    for (const auto* e : candidates_)
        if (e->parents == parents) return e->score - log_z_;
    throw std::invalid_argument("parent set {" + parent_set_key(parents) + "} is not a candidate");
}

std::vector<EdgeOp> single_edge_neighborhood(const Dag& dag, const StructPrior& prior) {
    const std::size_t n = dag.n_nodes();
    const auto desc = descendant_sets(dag);
    std::vector<EdgeOp> ops;
    for (std::size_t j = 0; j < n; ++j) {
        const NodeSet pa_j = dag.parents(j);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            if (contains(pa_j, i)) {
                if (prior.admits_parent_set(j, pa_j & ~bit(i))) {
                    ops.push_back({EdgeOpKind::Delete, i, j});
                    // Reversal is acyclic iff no other path leads from i to j.
                    bool other_path = false;
                    for_each_member(dag.children(i) & ~bit(j), [&](std::size_t c) {
                        if (contains(desc[c], j)) other_path = true;
                    });
                    if (!other_path && prior.admits_parent_set(i, dag.parents(i) | bit(j)))
                        ops.push_back({EdgeOpKind::Reverse, i, j});
                }
            } else if (!contains(desc[j], i) && prior.admits_parent_set(j, pa_j | bit(i))) {
                ops.push_back({EdgeOpKind::Add, i, j});
            }
        }
    }
    return ops;
}

namespace {

MoveKind kind_of(EdgeOpKind k) {
    switch (k) {
        case EdgeOpKind::Add: return MoveKind::AddEdge;
        case EdgeOpKind::Delete: return MoveKind::DeleteEdge;
        case EdgeOpKind::Reverse: return MoveKind::ReverseEdge;
    }
    return MoveKind::AddEdge;
}

Proposal degenerate(const Dag& dag, MoveKind kind) {
    Proposal p;
    p.proposed = dag;
    p.kind = kind;
    p.degenerate = true;
    return p;
}

Dag orphan(const Dag& dag, NodeSet nodes, NodeSet keep) {
    std::vector<NodeSet> parents(dag.parent_sets().begin(), dag.parent_sets().end());
    for_each_member(nodes, [&](std::size_t v) { parents[v] &= keep; });
    return Dag(std::move(parents));
}

}  // namespace

Proposal propose_single_edge(const Dag& dag, const StructPrior& prior, const ScoreCache&, Rng& rng) {
    const auto ops = single_edge_neighborhood(dag, prior);
    if (ops.empty()) return degenerate(dag, MoveKind::AddEdge);
    const EdgeOp op = ops[rng.index(ops.size())];

    std::vector<NodeSet> parents(dag.parent_sets().begin(), dag.parent_sets().end());
    switch (op.kind) {
        case EdgeOpKind::Add: parents[op.to] |= bit(op.from); break;
        case EdgeOpKind::Delete: parents[op.to] &= ~bit(op.from); break;
        case EdgeOpKind::Reverse:
            parents[op.to] &= ~bit(op.from);
            parents[op.from] |= bit(op.to);
            break;
    }
    Proposal p;
    p.proposed = Dag(std::move(parents));
    p.kind = kind_of(op.kind);
    p.pivot_from = op.from;
    p.pivot_to = op.to;
    const auto reverse_size = single_edge_neighborhood(p.proposed, prior).size();
    p.log_hastings = std::log(static_cast<double>(ops.size())) - std::log(static_cast<double>(reverse_size));
    return p;
}

Proposal propose_rev(const Dag& dag, const StructPrior&, const ScoreCache& cache, Rng& rng) {
    const std::size_t n_edges = dag.edge_count();
    if (n_edges == 0) return degenerate(dag, MoveKind::Rev);

    // Edges ordered by child, then parent.
    std::size_t pick = rng.index(n_edges);
    std::size_t from = 0, to = 0;
    for (std::size_t c = 0; c < dag.n_nodes(); ++c) {
        const std::size_t k = set_size(dag.parents(c));
        if (pick < k) {
            NodeSet s = dag.parents(c);
            for (std::size_t skip = 0; skip < pick; ++skip) s &= s - 1;
            from = static_cast<std::size_t>(std::countr_zero(s));
            to = c;
            break;
        }
        pick -= k;
    }
    const std::size_t i = from;
    const std::size_t j = to;
    const NodeSet old_i = dag.parents(i);
    const NodeSet old_j = dag.parents(j);

    const Dag base = orphan(dag, bit(i) | bit(j), 0);
    const auto base_desc = descendant_sets(base);

    const ParentSetDistribution fwd_i(cache, i, base_desc[i], bit(j));
    if (fwd_i.empty()) return degenerate(dag, MoveKind::Rev);
    const NodeSet new_i = fwd_i.sample(rng);
    const Dag mid = base.with_parents(i, new_i);
    const ParentSetDistribution fwd_j(cache, j, descendants(mid, j), 0);
    if (fwd_j.empty()) return degenerate(dag, MoveKind::Rev);
    const NodeSet new_j = fwd_j.sample(rng);

    Proposal p;
    p.proposed = mid.with_parents(j, new_j);
    p.kind = MoveKind::Rev;
    p.pivot_from = i;
    p.pivot_to = j;

    // Reverse path: pick j->i in G', orphan both (same base graph), draw j's
    // parents containing i, then i's parents.
    const ParentSetDistribution rev_j(cache, j, base_desc[j], bit(i));
    const Dag rev_mid = base.with_parents(j, old_j);
    const ParentSetDistribution rev_i(cache, i, descendants(rev_mid, i), 0);

    const double log_fwd = -std::log(static_cast<double>(n_edges)) + fwd_i.log_probability(new_i) +
                           fwd_j.log_probability(new_j);
    const double log_rev = -std::log(static_cast<double>(p.proposed.edge_count())) +
                           rev_j.log_probability(old_j) + rev_i.log_probability(old_i);
    p.log_hastings = log_rev - log_fwd;
    return p;
}

Proposal propose_mbr(const Dag& dag, const StructPrior&, const ScoreCache& cache, Rng& rng) {
    const std::size_t v = rng.index(dag.n_nodes());
    const NodeSet kids = dag.children(v);
    const Dag base = orphan(orphan(dag, bit(v), 0), kids, bit(v));

    const ParentSetDistribution dist_v(cache, v, descendants(base, v), 0);
    if (dist_v.empty()) return degenerate(dag, MoveKind::Mbr);

    double log_fwd = 0.0;
    const NodeSet new_v = dist_v.sample(rng);
    log_fwd += dist_v.log_probability(new_v);
    Dag current = base.with_parents(v, new_v);
    bool stuck = false;
    for_each_member(kids, [&](std::size_t c) {
        if (stuck) return;
        const ParentSetDistribution dist_c(cache, c, descendants(current, c), bit(v));
        if (dist_c.empty()) {
            stuck = true;
            return;
        }
        const NodeSet new_c = dist_c.sample(rng);
        log_fwd += dist_c.log_probability(new_c);
        current = current.with_parents(c, new_c);
    });
    if (stuck) return degenerate(dag, MoveKind::Mbr);

    // Reverse path from G': v has the same children and strips to the same
    // base graph, so only the per-child partition sums differ.
    double log_rev = dist_v.log_probability(dag.parents(v));
    Dag replay = base.with_parents(v, dag.parents(v));
    for_each_member(kids, [&](std::size_t c) {
        const ParentSetDistribution dist_c(cache, c, descendants(replay, c), bit(v));
        log_rev += dist_c.log_probability(dag.parents(c));
        replay = replay.with_parents(c, dag.parents(c));
    });
    assert(replay == dag);

    Proposal p;
    p.proposed = std::move(current);
    p.kind = MoveKind::Mbr;
    p.pivot_from = v;
    p.pivot_to = v;
    p.log_hastings = log_rev - log_fwd;
    return p;
}

Proposal propose(MoveFamily family, const Dag& dag, const StructPrior& prior, const ScoreCache& cache, Rng& rng) {
    switch (family) {
        case MoveFamily::SingleEdge: return propose_single_edge(dag, prior, cache, rng);
        case MoveFamily::Rev: return propose_rev(dag, prior, cache, rng);
        case MoveFamily::Mbr: return propose_mbr(dag, prior, cache, rng);
    }
    throw std::logic_error("unknown move family");
}

}  // namespace bnmc
