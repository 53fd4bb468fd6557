#ifndef BNMC_MOVES_HPP
#define BNMC_MOVES_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "bnmc/graph.hpp"
#include "bnmc/prior.hpp"
#include "bnmc/rng.hpp"
#include "bnmc/scoring.hpp"

namespace bnmc {

enum class MoveKind { AddEdge, DeleteEdge, ReverseEdge, Rev, Mbr };

// "add", "delete", "reverse", "rev", "mbr"
std::string_view to_string(MoveKind kind);
MoveKind parse_move_kind(std::string_view text);

/// A proposed DAG together with log q(G|G') - log q(G'|G).
///
/// Degenerate proposals carry the current DAG unchanged and must be treated
/// as a rejected step. `pivot` records the random choice that determines the
/// reverse move: the edge (from, to) for single-edge ops and REV, (v, v) for
/// MBR.
struct Proposal {
    Dag proposed;
    double log_hastings = 0.0;
    MoveKind kind = MoveKind::AddEdge;
    bool degenerate = false;
    std::size_t pivot_from = 0;
    std::size_t pivot_to = 0;
};

struct MoveWeights {
    double single = 0.8;
    double rev = 0.1;
    double mbr = 0.1;

    // "single=0.8,rev=0.1,mbr=0.1"; omitted kinds are 0. The values must sum
    // to 1 within 1e-6 and are then renormalized exactly.
    static MoveWeights parse(std::string_view text);
    std::string to_string() const;
    void validate() const;
};

enum class MoveFamily { SingleEdge, Rev, Mbr };

MoveFamily draw_family(const MoveWeights& weights, Rng& rng);

/// Distribution over the cached parent sets of one node that contain
/// `must_contain` and avoid `forbidden`, with probability proportional to
/// exp(local score). Normalized in log space.
class ParentSetDistribution {
public:
    ParentSetDistribution(const ScoreCache& cache, std::size_t node, NodeSet forbidden, NodeSet must_contain);

    bool empty() const { return candidates_.empty(); }
    std::size_t size() const { return candidates_.size(); }
    double log_partition() const { return log_z_; }

    NodeSet sample(Rng& rng) const;
    // log P(parents); throws std::invalid_argument when it is not a candidate.
    double log_probability(NodeSet parents) const;

private:
    std::vector<const ScoreCache::Entry*> candidates_;
    std::vector<double> weights_;  // exp(score - max)
    double weight_total_ = 0.0;
    double log_z_ = 0.0;
};

// All acyclic add/delete/reverse results that the prior admits, as ops.
std::vector<EdgeOp> single_edge_neighborhood(const Dag& dag, const StructPrior& prior);

// Uniform draw from the single-edge neighborhood N(G);
// log_hastings = ln|N(G)| - ln|N(G')|.
Proposal propose_single_edge(const Dag& dag, const StructPrior& prior, const ScoreCache& cache, Rng& rng);

// New edge reversal: pick an edge i->j uniformly, orphan i and j, draw new
// parents for i that include j, then new parents for j, each proportional to
// exp(score) among sets that keep the graph acyclic.
Proposal propose_rev(const Dag& dag, const StructPrior& prior, const ScoreCache& cache, Rng& rng);

// Markov blanket resampling: pick v uniformly, strip the parents of v and
// every parent except v of each child, then redraw v's parents and, in
// increasing index order, each child's parents (which must keep v).
Proposal propose_mbr(const Dag& dag, const StructPrior& prior, const ScoreCache& cache, Rng& rng);

Proposal propose(MoveFamily family, const Dag& dag, const StructPrior& prior, const ScoreCache& cache, Rng& rng);

}  // namespace bnmc

#endif  // BNMC_MOVES_HPP
