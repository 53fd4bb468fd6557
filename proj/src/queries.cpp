#include "bnmc/queries.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace bnmc {

Feature directed_arc(std::size_t from, std::size_t to) {
    return [from, to](const Dag& g) { return g.has_edge(from, to); };
}

Feature undirected_adjacency(std::size_t a, std::size_t b) {
    return [a, b](const Dag& g) { return g.has_edge(a, b) || g.has_edge(b, a); };
}

namespace {

std::size_t node_index(std::string_view name, const std::vector<std::string>& names) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw UsageError("unknown node '" + std::string(name) + "' in feature");
    return static_cast<std::size_t>(it - names.begin());
}

bool is_node(std::string_view name, const std::vector<std::string>& names) {
    return std::find(names.begin(), names.end(), name) != names.end();
}

// Decoded DAG per record; decoding each distinct encoding once.
std::vector<const Dag*> decode_all(const Trace& trace, std::unordered_map<std::string, Dag>& memo) {
    std::vector<const Dag*> out;
    out.reserve(trace.size());
    for (const auto& r : trace.records) {
        auto it = memo.find(r.dag_hex);
        if (it == memo.end()) it = memo.emplace(r.dag_hex, decode_dag(r.dag_hex, trace.header.n_nodes)).first;
        out.push_back(&it->second);
    }
    return out;
}

double mean_of(const std::vector<const Dag*>& dags, const Feature& f) {
    std::size_t hits = 0;
    for (const Dag* g : dags) hits += f(*g) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(dags.size());
}

}  // namespace

FeatureQuery FeatureQuery::parse(std::string_view text, const std::vector<std::string>& names) {
    FeatureQuery q;
    if (text == "all-arcs") {
        q.kind = QueryKind::AllArcs;
    } else if (text == "all-adj") {
        q.kind = QueryKind::AllAdjacencies;
    } else if (text == "score-trace" || text == "score-trace:sorted") {
        q.kind = QueryKind::NormalizedScoreTrace;
        q.sorted = text.ends_with(":sorted");
    } else if (text.starts_with("dag-freq:")) {
        q.kind = QueryKind::DagFrequency;
        const auto num = text.substr(9);
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), q.top_k);
        if (ec != std::errc{} || ptr != num.data() + num.size() || q.top_k == 0)
            throw UsageError("dag-freq needs a positive count");
    } else if (text.starts_with("arc:")) {
        q.kind = QueryKind::DirectedArc;
        const auto body = text.substr(4);
        const auto arrow = body.find("->");
        if (arrow == std::string_view::npos) throw UsageError("arc feature must look like arc:a->b");
        q.a = node_index(body.substr(0, arrow), names);
        q.b = node_index(body.substr(arrow + 2), names);
    } else if (text.starts_with("adj:")) {
        q.kind = QueryKind::UndirectedAdjacency;
        const auto body = text.substr(4);
        // Node names may contain '-': take the split where both sides are nodes.
        bool found = false;
        for (std::size_t pos = body.find('-'); pos != std::string_view::npos; pos = body.find('-', pos + 1)) {
            if (is_node(body.substr(0, pos), names) && is_node(body.substr(pos + 1), names)) {
                q.a = node_index(body.substr(0, pos), names);
                q.b = node_index(body.substr(pos + 1), names);
                found = true;
                break;
            }
        }
        if (!found) throw UsageError("adjacency feature must look like adj:a-b with known nodes");
    } else {
        throw UsageError("unknown feature '" + std::string(text) + "'");
    }
    if ((q.kind == QueryKind::DirectedArc || q.kind == QueryKind::UndirectedAdjacency) && q.a == q.b)
        throw UsageError("feature endpoints must differ");
    return q;
}

double estimate(const Trace& trace, const Feature& feature) {
    if (trace.empty()) throw InputError("cannot estimate from an empty trace");
    std::unordered_map<std::string, Dag> memo;
    return mean_of(decode_all(trace, memo), feature);
}

QueryReport estimate(const Trace& trace, const FeatureQuery& query) {
    if (trace.empty()) throw InputError("cannot estimate from an empty trace");
    const auto& names = trace.header.nodes;
    const std::size_t n = trace.header.n_nodes;
    for (std::size_t v : {query.a, query.b})
        if (v >= n) throw UsageError("feature node index out of range");

    switch (query.kind) {
        case QueryKind::DagFrequency: return dag_frequency(trace, query.top_k);
        case QueryKind::NormalizedScoreTrace: {
            QueryReport r;
            r.feature = query.sorted ? "score-trace:sorted" : "score-trace";
            r.sample_size = trace.size();
            r.values = normalized_score_trace(trace, query.sorted);
            return r;
        }
        default: break;
    }

    std::unordered_map<std::string, Dag> memo;
    const auto dags = decode_all(trace, memo);
    QueryReport r;
    r.sample_size = trace.size();
    switch (query.kind) {
        case QueryKind::DirectedArc:
            r.feature = "arc:" + names[query.a] + "->" + names[query.b];
            r.estimates.emplace_back(names[query.a] + "->" + names[query.b],
                                     mean_of(dags, directed_arc(query.a, query.b)));
            break;
        case QueryKind::UndirectedAdjacency:
            r.feature = "adj:" + names[query.a] + "-" + names[query.b];
            r.estimates.emplace_back(names[query.a] + "-" + names[query.b],
                                     mean_of(dags, undirected_adjacency(query.a, query.b)));
            break;
        case QueryKind::AllArcs: {
            r.feature = "all-arcs";
            // One pass: tally each parent mask bit.
            std::vector<std::size_t> tally(n * n, 0);
            for (const Dag* g : dags)
                for (std::size_t c = 0; c < n; ++c)
                    for_each_member(g->parents(c), [&](std::size_t p) { ++tally[p * n + c]; });
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t c = 0; c < n; ++c)
                    if (p != c)
                        r.estimates.emplace_back(names[p] + "->" + names[c],
                                                 static_cast<double>(tally[p * n + c]) / dags.size());
            break;
        }
        case QueryKind::AllAdjacencies:
            r.feature = "all-adj";
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = a + 1; b < n; ++b)
                    r.estimates.emplace_back(names[a] + "-" + names[b], mean_of(dags, undirected_adjacency(a, b)));
            break;
        default: break;
    }
    return r;
}

QueryReport dag_frequency(const Trace& trace, std::size_t top_k) {
    if (trace.empty()) throw InputError("cannot count DAGs in an empty trace");
    std::unordered_map<std::string, DagCount> tally;
    for (const auto& rec : trace.records) {
        auto& entry = tally[rec.dag_hex];
        entry.dag_hex = rec.dag_hex;
        entry.log_score = rec.log_score;
        ++entry.count;
    }
    QueryReport r;
    r.feature = top_k == 0 ? "dag-freq" : "dag-freq:" + std::to_string(top_k);
    r.sample_size = trace.size();
    for (auto& [hex, c] : tally) r.dags.push_back(std::move(c));
    std::sort(r.dags.begin(), r.dags.end(), [](const DagCount& x, const DagCount& y) {
        return x.count != y.count ? x.count > y.count : x.dag_hex < y.dag_hex;
    });
    if (top_k != 0 && r.dags.size() > top_k) r.dags.resize(top_k);
    return r;
}

std::vector<double> normalized_score_trace(const Trace& trace, bool sorted) {
    if (trace.empty()) throw InputError("cannot normalize an empty trace");
    double best = trace.records.front().log_score;
    for (const auto& r : trace.records) best = std::max(best, r.log_score);
    std::vector<double> out;
    out.reserve(trace.size());
    for (const auto& r : trace.records) out.push_back(r.log_score - best);
    if (sorted) std::sort(out.begin(), out.end());
    return out;
}

std::string report_to_json(const QueryReport& report) {
    nlohmann::ordered_json doc;
    doc["method"] = report.method;
    doc["feature"] = report.feature;
    doc["sample_size"] = report.sample_size;
    if (!report.estimates.empty()) {
        nlohmann::ordered_json est = nlohmann::ordered_json::object();
        for (const auto& [k, v] : report.estimates) est[k] = v;
        doc["estimates"] = std::move(est);
    }
    if (!report.dags.empty()) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& d : report.dags) {
            nlohmann::ordered_json row;
            row["dag_hex"] = d.dag_hex;
            row["count"] = d.count;
            row["frequency"] = report.sample_size ? static_cast<double>(d.count) / report.sample_size : 0.0;
            row["log_score"] = d.log_score;
            arr.push_back(std::move(row));
        }
        doc["dags"] = std::move(arr);
    }
    if (!report.values.empty()) doc["values"] = report.values;
    return doc.dump(2) + "\n";
}

std::string report_to_csv(const QueryReport& report) {
    std::ostringstream out;
    out << std::setprecision(17);
    if (!report.dags.empty()) {
        out << "dag_hex,count,frequency,log_score\n";
        for (const auto& d : report.dags)
            out << d.dag_hex << ',' << d.count << ',' << static_cast<double>(d.count) / report.sample_size << ','
                << d.log_score << '\n';
    } else if (!report.values.empty()) {
        out << "index,normalized_score\n";
        for (std::size_t i = 0; i < report.values.size(); ++i) out << i << ',' << report.values[i] << '\n';
    } else {
        out << "feature,posterior\n";
        for (const auto& [k, v] : report.estimates) out << k << ',' << v << '\n';
    }
    return out.str();
}

}  // namespace bnmc
