#ifndef BNMC_GRAPH_HPP
#define BNMC_GRAPH_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bnmc/bits.hpp"
#include "bnmc/errors.hpp"

namespace bnmc {

class StructPrior;

// True iff the digraph given by per-node parent sets has a topological order.
// Self-loops count as cycles.
bool is_acyclic(std::span<const NodeSet> parents);

/// Directed acyclic graph over dense node indices 0..n-1, stored as one
/// parent set per node. Values are immutable; every constructor rejects
/// cycles and self-loops, so a Dag in hand is always valid.
class Dag {
public:
    Dag() = default;
    explicit Dag(std::size_t n_nodes);
    explicit Dag(std::vector<NodeSet> parents);

    std::size_t n_nodes() const { return parents_.size(); }
    NodeSet parents(std::size_t v) const { return parents_[v]; }
    std::span<const NodeSet> parent_sets() const { return parents_; }

    NodeSet children(std::size_t v) const;
    bool has_edge(std::size_t from, std::size_t to) const { return contains(parents_[to], from); }
    std::size_t edge_count() const;

    // Copy with parents(v) replaced; throws GraphError if that closes a cycle.
    Dag with_parents(std::size_t v, NodeSet new_parents) const;

    bool operator==(const Dag&) const = default;

private:
    std::vector<NodeSet> parents_;
};

std::vector<std::size_t> topological_order(const Dag& dag);

// desc[v] = every node reachable from v along directed edges (v excluded).
std::vector<NodeSet> descendant_sets(const Dag& dag);
NodeSet descendants(const Dag& dag, std::size_t v);

// Parents, children and co-parents of v's children, without v itself.
NodeSet markov_blanket(const Dag& dag, std::size_t v);

enum class EdgeOpKind { Add, Delete, Reverse };

struct EdgeOp {
    EdgeOpKind kind;
    std::size_t from;
    std::size_t to;

    bool operator==(const EdgeOp&) const = default;
};

enum class EdgeOpRejection {
    SelfLoop,
    EdgePresent,
    EdgeAbsent,
    CycleViolation,
    ParentLimitViolation,
    ConstraintViolation,
};

std::string_view to_string(EdgeOpRejection r);

using EdgeOpResult = std::variant<Dag, EdgeOpRejection>;

// Applies one single-edge operation and checks the result against the
// prior's ban/retain masks and parent limit. Reference implementation: a full
// acyclicity check per call.
EdgeOpResult apply_edge_op(const Dag& dag, const EdgeOp& op, const StructPrior& prior);

// Canonical encoding: the n*n adjacency matrix with row = child and
// column = parent, read row-major as a bit string (first bit most
// significant), left-padded to a multiple of four bits and printed as
// lowercase hex.
std::string encode_dag(const Dag& dag);
Dag decode_dag(std::string_view hex, std::size_t n_nodes);

struct NamedDag {
    std::vector<std::string> names;
    Dag dag;
};

// {"nodes": [...], "parents": {"b": ["a"], ...}}
NamedDag parse_dag_json(std::string_view text);
NamedDag read_dag_json(const std::filesystem::path& path);
std::string dag_to_json(const NamedDag& named);

// 0/1 matrix, row = child and column = parent. An optional header row of node
// names is matched against `names`. The result need not be acyclic (ban masks).
std::vector<NodeSet> parse_adjacency_csv(std::istream& in, const std::vector<std::string>& names);
std::vector<NodeSet> read_adjacency_csv(const std::filesystem::path& path,
                                        const std::vector<std::string>& names);
void write_adjacency_csv(std::ostream& out, std::span<const NodeSet> parents,
                         const std::vector<std::string>& names);

}  // namespace bnmc

#endif  // BNMC_GRAPH_HPP
