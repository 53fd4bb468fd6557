#include "bnmc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bnmc/prior.hpp"

namespace bnmc {

using json = nlohmann::json;

bool is_acyclic(std::span<const NodeSet> parents) {
    // Kahn's algorithm on parent masks: repeatedly peel nodes whose
    // remaining parents have all been placed.
    const std::size_t n = parents.size();
    NodeSet placed = 0;
    std::size_t count = 0;
    bool progress = true;
    while (progress && count < n) {
        progress = false;
        for (std::size_t v = 0; v < n; ++v) {
            if (contains(placed, v)) continue;
            if ((parents[v] & ~placed) == 0 && !contains(parents[v], v)) {
                placed |= bit(v);
                ++count;
                progress = true;
            }
        }
    }
    return count == n;
}

Dag::Dag(std::size_t n_nodes) : parents_(n_nodes, 0) {
    if (n_nodes > kMaxNodes) throw GraphError("at most 64 nodes are supported");
}

Dag::Dag(std::vector<NodeSet> parents) : parents_(std::move(parents)) {
    if (parents_.size() > kMaxNodes) throw GraphError("at most 64 nodes are supported");
    const NodeSet all = full_set(parents_.size());
    for (std::size_t v = 0; v < parents_.size(); ++v) {
        if (parents_[v] & ~all) throw GraphError("parent index out of range");
        if (contains(parents_[v], v)) throw GraphError("self-loop at node " + std::to_string(v));
    }
    if (!is_acyclic(parents_)) throw GraphError("parent sets contain a directed cycle");
}

NodeSet Dag::children(std::size_t v) const {
    NodeSet out = 0;
    for (std::size_t c = 0; c < parents_.size(); ++c)
        if (contains(parents_[c], v)) out |= bit(c);
    return out;
}

std::size_t Dag::edge_count() const {
    std::size_t e = 0;
    for (NodeSet p : parents_) e += set_size(p);
    return e;
}

Dag Dag::with_parents(std::size_t v, NodeSet new_parents) const {
    std::vector<NodeSet> next = parents_;
    next.at(v) = new_parents;
    return Dag(std::move(next));
}

std::vector<std::size_t> topological_order(const Dag& dag) {
    std::vector<std::size_t> order;
    order.reserve(dag.n_nodes());
    NodeSet placed = 0;
    while (order.size() < dag.n_nodes()) {
        for (std::size_t v = 0; v < dag.n_nodes(); ++v) {
            if (!contains(placed, v) && (dag.parents(v) & ~placed) == 0) {
                placed |= bit(v);
                order.push_back(v);
            }
        }
    }
    return order;
}

std::vector<NodeSet> descendant_sets(const Dag& dag) {
    const auto order = topological_order(dag);
    std::vector<NodeSet> desc(dag.n_nodes(), 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::size_t v = *it;
        for_each_member(dag.parents(v), [&](std::size_t p) { desc[p] |= bit(v) | desc[v]; });
    }
    return desc;
}

NodeSet descendants(const Dag& dag, std::size_t v) {
    NodeSet seen = 0;
    NodeSet frontier = dag.children(v);
    while (frontier != 0) {
        seen |= frontier;
        NodeSet next = 0;
        for_each_member(frontier, [&](std::size_t u) { next |= dag.children(u); });
        frontier = next & ~seen;
    }
    return seen;
}

NodeSet markov_blanket(const Dag& dag, std::size_t v) {
    if (v >= dag.n_nodes()) throw std::out_of_range("node index " + std::to_string(v) + " out of range");
    const NodeSet kids = dag.children(v);
    NodeSet mb = dag.parents(v) | kids;
    for_each_member(kids, [&](std::size_t c) { mb |= dag.parents(c); });
    return mb & ~bit(v);
}

std::string_view to_string(EdgeOpRejection r) {
    switch (r) {
        case EdgeOpRejection::SelfLoop: return "self-loop";
        case EdgeOpRejection::EdgePresent: return "edge already present";
        case EdgeOpRejection::EdgeAbsent: return "edge absent";
        case EdgeOpRejection::CycleViolation: return "would create a directed cycle";
        case EdgeOpRejection::ParentLimitViolation: return "would exceed max_parents";
        case EdgeOpRejection::ConstraintViolation: return "violates ban/retain constraints";
    }
    return "unknown";
}

EdgeOpResult apply_edge_op(const Dag& dag, const EdgeOp& op, const StructPrior& prior) {
    const std::size_t n = dag.n_nodes();
    if (op.from >= n || op.to >= n) throw std::out_of_range("edge operation index out of range");
    if (op.from == op.to) return EdgeOpRejection::SelfLoop;

    std::vector<NodeSet> next(dag.parent_sets().begin(), dag.parent_sets().end());
    const std::size_t i = op.from;
    const std::size_t j = op.to;
    switch (op.kind) {
        case EdgeOpKind::Add:
            if (dag.has_edge(i, j)) return EdgeOpRejection::EdgePresent;
            next[j] |= bit(i);
            break;
        case EdgeOpKind::Delete:
            if (!dag.has_edge(i, j)) return EdgeOpRejection::EdgeAbsent;
            next[j] &= ~bit(i);
            break;
        case EdgeOpKind::Reverse:
            if (!dag.has_edge(i, j)) return EdgeOpRejection::EdgeAbsent;
            next[j] &= ~bit(i);
            next[i] |= bit(j);
            break;
    }

    for (std::size_t v : {i, j}) {
        if (set_size(next[v]) > prior.max_parents()) return EdgeOpRejection::ParentLimitViolation;
    }
    for (std::size_t v : {i, j}) {
        if (!prior.admits_parent_set(v, next[v])) return EdgeOpRejection::ConstraintViolation;
    }
    if (!is_acyclic(next)) return EdgeOpRejection::CycleViolation;
    return Dag(std::move(next));
}

std::string encode_dag(const Dag& dag) {
    const std::size_t n = dag.n_nodes();
    const std::size_t n_bits = n * n;
    const std::size_t n_digits = (n_bits + 3) / 4;
    const std::size_t pad = n_digits * 4 - n_bits;
    std::string out(n_digits, '0');
    for (std::size_t child = 0; child < n; ++child) {
        for_each_member(dag.parents(child), [&](std::size_t parent) {
            const std::size_t pos = pad + child * n + parent;  // from the most significant end
            out[pos / 4] = static_cast<char>(out[pos / 4] | (8 >> (pos % 4)));
        });
    }
    static constexpr char kDigits[] = "0123456789abcdef";
    for (char& c : out) c = kDigits[c - '0'];
    return out;
}

Dag decode_dag(std::string_view hex, std::size_t n_nodes) {
    const std::size_t n_bits = n_nodes * n_nodes;
    const std::size_t n_digits = (n_bits + 3) / 4;
    if (hex.size() != n_digits)
        throw GraphError("DAG encoding '" + std::string(hex) + "' has wrong length for " +
                         std::to_string(n_nodes) + " nodes");
    const std::size_t pad = n_digits * 4 - n_bits;
    std::vector<NodeSet> parents(n_nodes, 0);
    for (std::size_t d = 0; d < n_digits; ++d) {
        const char c = hex[d];
        int value;
        if (c >= '0' && c <= '9') value = c - '0';
        else if (c >= 'a' && c <= 'f') value = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') value = c - 'A' + 10;
        else throw GraphError("invalid hex digit in DAG encoding");
        for (std::size_t b = 0; b < 4; ++b) {
            if (!(value & (8 >> b))) continue;
            const std::size_t pos = d * 4 + b;
            if (pos < pad) throw GraphError("nonzero padding bits in DAG encoding");
            const std::size_t cell = pos - pad;
            parents[cell / n_nodes] |= bit(cell % n_nodes);
        }
    }
    return Dag(std::move(parents));
}

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw GraphError("unknown node '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

NamedDag parse_dag_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw GraphError(std::string("invalid DAG JSON: ") + e.what());
    }
    if (!doc.contains("nodes") || !doc["nodes"].is_array()) throw GraphError("DAG JSON lacks a \"nodes\" array");
    NamedDag out;
    for (const auto& n : doc["nodes"]) out.names.push_back(n.get<std::string>());
    for (std::size_t i = 0; i < out.names.size(); ++i)
        for (std::size_t k = i + 1; k < out.names.size(); ++k)
            if (out.names[i] == out.names[k]) throw GraphError("duplicate node name '" + out.names[i] + "'");

    std::vector<NodeSet> parents(out.names.size(), 0);
    if (doc.contains("parents")) {
        for (const auto& [child, plist] : doc["parents"].items()) {
            const std::size_t c = index_of(out.names, child);
            for (const auto& p : plist) parents[c] |= bit(index_of(out.names, p.get<std::string>()));
        }
    }
    out.dag = Dag(std::move(parents));
    return out;
}

NamedDag read_dag_json(const std::filesystem::path& path) { return parse_dag_json(slurp(path)); }

std::string dag_to_json(const NamedDag& named) {
    json doc;
    doc["nodes"] = named.names;
    json parents = json::object();
    for (std::size_t v = 0; v < named.dag.n_nodes(); ++v) {
        json list = json::array();
        for_each_member(named.dag.parents(v), [&](std::size_t p) { list.push_back(named.names[p]); });
        parents[named.names[v]] = std::move(list);
    }
    doc["parents"] = std::move(parents);
    return doc.dump(2) + "\n";
}

std::vector<NodeSet> parse_adjacency_csv(std::istream& in, const std::vector<std::string>& names) {
    const std::size_t n = names.size();
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell.erase(0, cell.find_first_not_of(" \t"));
            cell.erase(cell.find_last_not_of(" \t") + 1);
            cells.push_back(cell);
        }
        rows.push_back(std::move(cells));
    }

    // Column order follows the header when one is present.
    std::vector<std::size_t> column_node(n);
    for (std::size_t i = 0; i < n; ++i) column_node[i] = i;
    if (!rows.empty() && !rows.front().empty() && rows.front().front() != "0" && rows.front().front() != "1") {
        if (rows.front().size() != n) throw GraphError("adjacency header must list every node");
        for (std::size_t i = 0; i < n; ++i) column_node[i] = index_of(names, rows.front()[i]);
        rows.erase(rows.begin());
    }
    if (rows.size() != n) throw GraphError("adjacency matrix must have one row per node");

    std::vector<NodeSet> parents(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n) throw GraphError("adjacency matrix row " + std::to_string(r) + " is not length n");
        const std::size_t child = column_node[r];
        for (std::size_t c = 0; c < n; ++c) {
            if (rows[r][c] == "1") parents[child] |= bit(column_node[c]);
            else if (rows[r][c] != "0") throw GraphError("adjacency matrix cells must be 0 or 1");
        }
    }
    return parents;
}

std::vector<NodeSet> read_adjacency_csv(const std::filesystem::path& path, const std::vector<std::string>& names) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return parse_adjacency_csv(in, names);
}

void write_adjacency_csv(std::ostream& out, std::span<const NodeSet> parents, const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    out << '\n';
    for (std::size_t child = 0; child < parents.size(); ++child) {
        for (std::size_t p = 0; p < parents.size(); ++p) out << (p ? "," : "") << (contains(parents[child], p) ? 1 : 0);
        out << '\n';
    }
}

}  // namespace bnmc
