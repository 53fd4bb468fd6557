#include "bnmc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bnmc/rng.hpp"

namespace bnmc {

using json = nlohmann::json;

DiscreteNetwork::DiscreteNetwork(std::vector<std::string> names, Dag dag, std::vector<Cpt> cpts)
    : names_(std::move(names)), dag_(std::move(dag)) {
    const std::size_t n = dag_.n_nodes();
    if (names_.size() != n) throw SimulationError("network names disagree with the DAG size");
    if (cpts.size() != n) throw SimulationError("need exactly one CPT per node");

    cpts_.resize(n);
    std::vector<bool> seen(n, false);
    for (auto& cpt : cpts) {
        if (cpt.node >= n) throw SimulationError("CPT node index out of range");
        if (seen[cpt.node]) throw SimulationError("two CPTs for node '" + names_[cpt.node] + "'");
        seen[cpt.node] = true;
        cpts_[cpt.node] = std::move(cpt);
    }

    arities_.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        const Cpt& cpt = cpts_[v];
        if (cpt.table.empty() || cpt.arity() < 2)
            throw SimulationError("CPT of '" + names_[v] + "' needs rows over at least 2 states");
        arities_[v] = cpt.arity();
    }

    for (std::size_t v = 0; v < n; ++v) {
        const Cpt& cpt = cpts_[v];
        NodeSet listed = 0;
        std::size_t rows = 1;
        for (std::size_t p : cpt.parents) {
            if (p >= n || contains(listed, p)) throw SimulationError("bad parent list in CPT of '" + names_[v] + "'");
            listed |= bit(p);
            rows *= arities_[p];
        }
        if (listed != dag_.parents(v))
            throw SimulationError("CPT parents of '" + names_[v] + "' disagree with the DAG");
        if (cpt.table.size() != rows)
            throw SimulationError("CPT of '" + names_[v] + "' has " + std::to_string(cpt.table.size()) +
                                  " rows, expected " + std::to_string(rows));
        for (const auto& row : cpt.table) {
            if (row.size() != cpt.arity()) throw SimulationError("ragged CPT for '" + names_[v] + "'");
            double sum = 0.0;
            for (double p : row) {
                if (!(p >= 0.0) || !std::isfinite(p))
                    throw SimulationError("negative or non-finite probability in CPT of '" + names_[v] + "'");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw SimulationError("CPT row of '" + names_[v] + "' sums to " + std::to_string(sum));
        }
    }
}

Dataset forward_sample(const DiscreteNetwork& net, std::size_t n_rows, std::uint64_t seed) {
    const std::size_t n = net.dag().n_nodes();
    const auto order = topological_order(net.dag());
    std::vector<std::vector<Category>> columns(n, std::vector<Category>(n_rows));
    Rng rng(seed);
    for (std::size_t row = 0; row < n_rows; ++row) {
        for (std::size_t v : order) {
            const Cpt& cpt = net.cpts()[v];
            std::size_t config = 0;
            for (std::size_t p : cpt.parents) config = config * net.arities()[p] + columns[p][row];
            const auto& probs = cpt.table[config];
            const double u = rng.uniform();
            double acc = 0.0;
            std::size_t state = probs.size() - 1;
            for (std::size_t k = 0; k < probs.size(); ++k) {
                acc += probs[k];
                if (u < acc) {
                    state = k;
                    break;
                }
            }
            // Zero-probability tail states are never returned.
            while (probs[state] == 0.0 && state > 0) --state;
            columns[v][row] = static_cast<Category>(state);
        }
    }
    return Dataset(net.names(), net.arities(), std::move(columns));
}

BenchmarkSpec benchmark_spec() {
    // a=0, b=1, c=2, d=3, e=4
    const std::vector<std::string> names{"a", "b", "c", "d", "e"};
    std::vector<NodeSet> parents(5, 0);
    parents[1] = bit(0);
    parents[2] = bit(0);
    parents[3] = bit(2);
    parents[4] = bit(1) | bit(3);
    std::vector<Cpt> cpts{
        {0, {}, {{0.6, 0.4}}},
        {1, {0}, {{0.7, 0.3}, {0.45, 0.55}}},
        {2, {0}, {{0.65, 0.35}, {0.45, 0.55}}},
        {3, {2}, {{0.65, 0.35}, {0.45, 0.55}}},
        {4, {1, 3}, {{0.8, 0.2}, {0.55, 0.45}, {0.5, 0.5}, {0.2, 0.8}}},
    };
    return {DiscreteNetwork(names, Dag(std::move(parents)), std::move(cpts)), {250, 500, 1000, 10000}};
}

namespace {

std::size_t lookup(const std::vector<std::string>& names, const std::string& name) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw SimulationError("unknown node '" + name + "' in CPT");
    return static_cast<std::size_t>(it - names.begin());
}

Cpt cpt_from_json(const json& j, const std::vector<std::string>& names) {
    Cpt cpt;
    cpt.node = lookup(names, j.at("node").get<std::string>());
    for (const auto& p : j.value("parents", json::array())) cpt.parents.push_back(lookup(names, p.get<std::string>()));
    cpt.table = j.at("table").get<std::vector<std::vector<double>>>();
    return cpt;
}

std::vector<Cpt> cpts_from_json(const json& doc, const std::vector<std::string>& names) {
    const json* list = &doc;
    json single;
    if (doc.is_object() && doc.contains("cpts")) {
        list = &doc["cpts"];
    } else if (doc.is_object()) {
        single = json::array({doc});
        list = &single;
    }
    std::vector<Cpt> out;
    for (const auto& j : *list) out.push_back(cpt_from_json(j, names));
    return out;
}

}  // namespace

DiscreteNetwork parse_network_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        const auto names = doc.at("nodes").get<std::vector<std::string>>();
        auto cpts = cpts_from_json(doc, names);
        Dag dag;
        if (doc.contains("parents")) {
            dag = parse_dag_json(text).dag;
        } else {
            std::vector<NodeSet> parents(names.size(), 0);
            for (const auto& cpt : cpts)
                for (std::size_t p : cpt.parents) parents[cpt.node] |= bit(p);
            dag = Dag(std::move(parents));
        }
        return DiscreteNetwork(names, std::move(dag), std::move(cpts));
    } catch (const json::exception& e) {
        throw SimulationError(std::string("invalid network JSON: ") + e.what());
    }
}

DiscreteNetwork read_network(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network_json(ss.str());
}

DiscreteNetwork bind_cpts(const NamedDag& dag, const std::string& cpt_json) {
    try {
        return DiscreteNetwork(dag.names, dag.dag, cpts_from_json(json::parse(cpt_json), dag.names));
    } catch (const json::exception& e) {
        throw SimulationError(std::string("invalid CPT JSON: ") + e.what());
    }
}

std::string network_to_json(const DiscreteNetwork& net, const std::vector<std::size_t>& sample_sizes) {
    nlohmann::ordered_json doc;
    doc["format_version"] = 1;
    doc["nodes"] = net.names();
    nlohmann::ordered_json parents = nlohmann::ordered_json::object();
    for (std::size_t v = 0; v < net.names().size(); ++v) {
        auto list = nlohmann::ordered_json::array();
        for_each_member(net.dag().parents(v), [&](std::size_t p) { list.push_back(net.names()[p]); });
        parents[net.names()[v]] = std::move(list);
    }
    doc["parents"] = std::move(parents);
    auto cpts = nlohmann::ordered_json::array();
    for (const auto& cpt : net.cpts()) {
        nlohmann::ordered_json j;
        j["node"] = net.names()[cpt.node];
        auto plist = nlohmann::ordered_json::array();
        for (std::size_t p : cpt.parents) plist.push_back(net.names()[p]);
        j["parents"] = std::move(plist);
        j["table"] = cpt.table;
        cpts.push_back(std::move(j));
    }
    doc["cpts"] = std::move(cpts);
    if (!sample_sizes.empty()) doc["sample_sizes"] = sample_sizes;
    return doc.dump(2) + "\n";
}

}  // namespace bnmc
