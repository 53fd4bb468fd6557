#ifndef BNMC_SIMULATE_HPP
#define BNMC_SIMULATE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bnmc/data.hpp"
#include "bnmc/graph.hpp"

namespace bnmc {

/// Conditional probability table of one node. Row j is the distribution of
/// the node given parent configuration j, enumerated mixed-radix over
/// `parents` in listed order with the last parent varying fastest.
struct Cpt {
    std::size_t node = 0;
    std::vector<std::size_t> parents;
    std::vector<std::vector<double>> table;

    std::size_t arity() const { return table.empty() ? 0 : table.front().size(); }
};

class SimulationError : public InputError {
public:
    using InputError::InputError;
};

/// A DAG with one CPT per node. Construction checks that each CPT matches
/// its node's parent set and that every row is a probability vector.
class DiscreteNetwork {
public:
    DiscreteNetwork() = default;
    DiscreteNetwork(std::vector<std::string> names, Dag dag, std::vector<Cpt> cpts);

    const std::vector<std::string>& names() const { return names_; }
    const Dag& dag() const { return dag_; }
    const std::vector<Cpt>& cpts() const { return cpts_; }
    const std::vector<std::size_t>& arities() const { return arities_; }

private:
    std::vector<std::string> names_;
    Dag dag_;
    std::vector<Cpt> cpts_;  // indexed by node
    std::vector<std::size_t> arities_;
};

// Draws n rows, each node in topological order from its CPT row.
Dataset forward_sample(const DiscreteNetwork& net, std::size_t n_rows, std::uint64_t seed);

struct BenchmarkSpec {
    DiscreteNetwork network;
    std::vector<std::size_t> sample_sizes;
};

// Five binary nodes a..e with arcs a->b, a->c, c->d, b->e, d->e; the same
// values ship as assets/benchmark5.json.
BenchmarkSpec benchmark_spec();

// Network JSON: {"nodes": [...], "parents": {...}, "cpts": [{"node", "parents", "table"}, ...]}.
// "parents" is optional (taken from the CPTs) and "cpts" may also be a bare array
// when `dag` is supplied separately.
DiscreteNetwork parse_network_json(const std::string& text);
DiscreteNetwork read_network(const std::filesystem::path& path);
std::string network_to_json(const DiscreteNetwork& net, const std::vector<std::size_t>& sample_sizes = {});

// CPT list ({"cpts": [...]}, a bare array, or a single CPT object) bound to a
// known DAG.
DiscreteNetwork bind_cpts(const NamedDag& dag, const std::string& cpt_json);

}  // namespace bnmc

#endif  // BNMC_SIMULATE_HPP
