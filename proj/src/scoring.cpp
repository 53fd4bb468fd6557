#include "bnmc/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace bnmc {

using json = nlohmann::json;

double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("log_gamma needs a finite positive argument");
    double shift = 1.0;
    while (x < 10.0) {
        shift *= x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series =
        inv * (1.0 / 12 +
               inv2 * (-1.0 / 360 +
                       inv2 * (1.0 / 1260 + inv2 * (-1.0 / 1680 + inv2 * (1.0 / 1188 + inv2 * (-691.0 / 360360))))));
    const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
    return (x - 0.5) * std::log(x) - x + half_log_two_pi + series - std::log(shift);
}

double bdeu_score(const ContingencyTable& table, double ess) {
    if (!(ess > 0.0) || !std::isfinite(ess)) throw UsageError("ess must be positive");
    const double q = static_cast<double>(table.n_configs());
    const double r = static_cast<double>(table.child_arity());
    const double a_j = ess / q;
    const double a_jk = ess / (q * r);
    const double lg_a_j = log_gamma(a_j);
    const double lg_a_jk = log_gamma(a_jk);
    double score = 0.0;
    for (std::size_t j = 0; j < table.n_configs(); ++j) {
        const std::uint64_t n_j = table.config_total(j);
        if (n_j == 0) continue;
        score += lg_a_j - log_gamma(a_j + static_cast<double>(n_j));
        for (std::size_t k = 0; k < table.child_arity(); ++k) {
            const std::uint64_t n_jk = table.at(j, k);
            if (n_jk != 0) score += log_gamma(a_jk + static_cast<double>(n_jk)) - lg_a_jk;
        }
    }
    return score;
}

namespace {

// Same closed form over only the observed cells, for configuration spaces too
// large for a dense table. Zero-count cells contribute nothing.
double bdeu_score_sparse(const Dataset& data, std::size_t child, NodeSet parents, double ess) {
    const std::size_t r = data.arity(child);
    const std::size_t q = config_count(data, parents, std::numeric_limits<std::size_t>::max() / r);
    const auto parent_idx = members(parents);
    std::vector<std::size_t> keys(data.n_rows());
    for (std::size_t row = 0; row < data.n_rows(); ++row) {
        std::size_t j = 0;
        for (std::size_t p : parent_idx) j = j * data.arity(p) + data.at(row, p);
        keys[row] = j * r + data.at(row, child);
    }
    std::sort(keys.begin(), keys.end());

    const double a_j = ess / static_cast<double>(q);
    const double a_jk = a_j / static_cast<double>(r);
    const double lg_a_j = log_gamma(a_j);
    const double lg_a_jk = log_gamma(a_jk);
    double score = 0.0;
    std::size_t i = 0;
    while (i < keys.size()) {
        const std::size_t config = keys[i] / r;
        std::size_t n_j = 0;
        while (i < keys.size() && keys[i] / r == config) {
            const std::size_t cell = keys[i];
            std::size_t n_jk = 0;
            while (i < keys.size() && keys[i] == cell) {
                ++n_jk;
                ++i;
            }
            score += log_gamma(a_jk + static_cast<double>(n_jk)) - lg_a_jk;
            n_j += n_jk;
        }
        score += lg_a_j - log_gamma(a_j + static_cast<double>(n_j));
    }
    return score;
}

}  // namespace

double local_score(const Dataset& data, std::size_t child, NodeSet parents, double ess) {
    if (!(ess > 0.0) || !std::isfinite(ess)) throw UsageError("ess must be positive");
    if (child >= data.n_vars()) throw std::out_of_range("child index out of range");
    if (contains(parents, child)) throw UsageError("a node cannot be its own parent");
    try {
        return bdeu_score(counts(data, child, parents), ess);
    } catch (const ConfigurationOverflow&) {
        return bdeu_score_sparse(data, child, parents, ess);
    }
}

ScoreCache::ScoreCache(StructPrior prior, double ess, std::vector<std::string> names,
                       std::vector<std::vector<Entry>> entries)
    : prior_(std::move(prior)), ess_(ess), names_(std::move(names)), entries_(std::move(entries)) {
    if (!(ess_ > 0.0) || !std::isfinite(ess_)) throw UsageError("ess must be positive");
    if (entries_.size() != prior_.n_nodes()) throw InputError("cache node count disagrees with its prior");
    if (names_.empty())
        for (std::size_t v = 0; v < entries_.size(); ++v) names_.push_back(std::to_string(v));
    if (names_.size() != entries_.size()) throw InputError("cache node names disagree with node count");
    for (std::size_t v = 0; v < entries_.size(); ++v) {
        auto& list = entries_[v];
        std::sort(list.begin(), list.end(), [](const Entry& a, const Entry& b) { return a.parents < b.parents; });
        for (std::size_t k = 0; k < list.size(); ++k) {
            if (k > 0 && list[k].parents == list[k - 1].parents)
                throw InputError("duplicate cache entry at node " + std::to_string(v));
            if (!prior_.admits_parent_set(v, list[k].parents))
                throw InputError("cache entry '" + parent_set_key(list[k].parents) + "' at node " +
                                 std::to_string(v) + " violates the cache's prior");
            if (!std::isfinite(list[k].score)) throw InputError("non-finite cache score at node " + std::to_string(v));
        }
        if (list.size() != prior_.parent_set_count(v))
            throw InputError("cache is incomplete at node " + std::to_string(v));
    }
}

std::size_t ScoreCache::entry_count() const {
    std::size_t total = 0;
    for (const auto& list : entries_) total += list.size();
    return total;
}

std::optional<double> ScoreCache::find(std::size_t v, NodeSet parents) const {
    const auto& list = entries_.at(v);
    auto it = std::lower_bound(list.begin(), list.end(), parents,
                               [](const Entry& e, NodeSet key) { return e.parents < key; });
    if (it == list.end() || it->parents != parents) return std::nullopt;
    return it->score;
}

double ScoreCache::score(std::size_t v, NodeSet parents) const {
    if (auto s = find(v, parents)) return *s;
    throw CacheMiss("no cached score for node " + std::to_string(v) + " with parents {" + parent_set_key(parents) +
                    "}");
}

ScoreCache build_cache(const Dataset& data, const StructPrior& prior, double ess, const CacheBuildOptions& options) {
    if (prior.n_nodes() != data.n_vars()) throw UsageError("prior and dataset disagree on the number of variables");
    if (!(ess > 0.0) || !std::isfinite(ess)) throw UsageError("ess must be positive");
    std::size_t planned = 0;
    for (std::size_t v = 0; v < prior.n_nodes(); ++v) {
        planned += prior.parent_set_count(v);
        if (planned > options.entry_budget)
            throw CacheBudgetExceeded("score cache would exceed the budget of " +
                                      std::to_string(options.entry_budget) + " entries");
    }

    const std::size_t n = prior.n_nodes();
    std::vector<std::vector<ScoreCache::Entry>> entries(n);
    for (std::size_t v = 0; v < n; ++v) {
        for (NodeSet s : prior.admissible_parent_sets(v)) entries[v].push_back({s, 0.0});
    }

    // Flatten to (node, slot) work items; workers fill disjoint slots.
    std::vector<std::pair<std::size_t, std::size_t>> work;
    work.reserve(planned);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t k = 0; k < entries[v].size(); ++k) work.emplace_back(v, k);

    const unsigned n_threads = std::max(1U, std::min<unsigned>(options.threads, static_cast<unsigned>(work.size())));
    auto run = [&](unsigned t) {
        for (std::size_t w = t; w < work.size(); w += n_threads) {
            auto [v, k] = work[w];
            entries[v][k].score = local_score(data, v, entries[v][k].parents, ess);
        }
    };
    if (n_threads == 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(run, t);
    }
    return ScoreCache(prior, ess, data.names(), std::move(entries));
}

ScoreCache constant_cache(const StructPrior& prior, double value, std::vector<std::string> names) {
    std::vector<std::vector<ScoreCache::Entry>> entries(prior.n_nodes());
    for (std::size_t v = 0; v < prior.n_nodes(); ++v)
        for (NodeSet s : prior.admissible_parent_sets(v)) entries[v].push_back({s, value});
    return ScoreCache(prior, 1.0, std::move(names), std::move(entries));
}

double total_score(const Dag& dag, const ScoreCache& cache) {
    if (dag.n_nodes() != cache.n_nodes()) throw InputError("DAG and cache disagree on the number of nodes");
    double total = 0.0;
    for (std::size_t v = 0; v < dag.n_nodes(); ++v) total += cache.score(v, dag.parents(v));
    return total;
}

std::string parent_set_key(NodeSet parents) {
    std::string key;
    for_each_member(parents, [&](std::size_t p) {
        if (!key.empty()) key += ',';
        key += std::to_string(p);
    });
    return key;
}

NodeSet parse_parent_set_key(const std::string& key) {
    NodeSet s = 0;
    std::stringstream ss(key);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        unsigned long idx = 0;
        try {
            idx = std::stoul(item, &pos);
        } catch (const std::exception&) {
            throw InputError("bad parent-set key '" + key + "'");
        }
        if (pos != item.size() || idx >= kMaxNodes) throw InputError("bad parent-set key '" + key + "'");
        s |= bit(idx);
    }
    return s;
}

namespace {

json edge_mask_json(const StructPrior& prior, bool banned) {
    json out = json::array();
    for (std::size_t child = 0; child < prior.n_nodes(); ++child) {
        const NodeSet mask = banned ? prior.banned(child) : prior.required(child);
        for_each_member(mask, [&](std::size_t parent) { out.push_back({parent, child}); });
    }
    return out;
}

std::vector<NodeSet> edge_mask_from_json(const json& arr, std::size_t n) {
    std::vector<NodeSet> masks(n, 0);
    for (const auto& pair : arr) {
        const auto parent = pair.at(0).get<std::size_t>();
        const auto child = pair.at(1).get<std::size_t>();
        if (parent >= n || child >= n) throw InputError("ban/retain edge index out of range in cache");
        masks[child] |= bit(parent);
    }
    return masks;
}

}  // namespace

std::string cache_to_json(const ScoreCache& cache) {
    json doc;
    doc["format_version"] = 1;
    doc["n"] = cache.n_nodes();
    doc["ess"] = cache.ess();
    doc["max_parents"] = cache.max_parents();
    doc["nodes"] = cache.names();
    doc["ban"] = edge_mask_json(cache.prior(), true);
    doc["retain"] = edge_mask_json(cache.prior(), false);
    json scores = json::object();
    for (std::size_t v = 0; v < cache.n_nodes(); ++v) {
        json node = json::object();
        for (const auto& e : cache.entries(v)) node[parent_set_key(e.parents)] = e.score;
        scores[std::to_string(v)] = std::move(node);
    }
    doc["scores"] = std::move(scores);
    return doc.dump() + "\n";
}

ScoreCache cache_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        const auto n = doc.at("n").get<std::size_t>();
        if (n > kMaxNodes) throw InputError("cache has more than 64 nodes");
        const auto max_parents = doc.at("max_parents").get<std::size_t>();
        const auto ess = doc.at("ess").get<double>();
        std::vector<std::string> names;
        if (doc.contains("nodes")) names = doc["nodes"].get<std::vector<std::string>>();
        auto banned = doc.contains("ban") ? edge_mask_from_json(doc["ban"], n) : std::vector<NodeSet>(n, 0);
        auto required = doc.contains("retain") ? edge_mask_from_json(doc["retain"], n) : std::vector<NodeSet>(n, 0);
        StructPrior prior(n, max_parents, std::move(banned), std::move(required));

        std::vector<std::vector<ScoreCache::Entry>> entries(n);
        for (const auto& [node_key, table] : doc.at("scores").items()) {
            const auto v = parse_parent_set_key(node_key);
            if (set_size(v) != 1) throw InputError("bad node key '" + node_key + "' in cache");
            const auto node = static_cast<std::size_t>(std::countr_zero(v));
            if (node >= n) throw InputError("node key out of range in cache");
            for (const auto& [set_key, score] : table.items())
                entries[node].push_back({parse_parent_set_key(set_key), score.get<double>()});
        }
        return ScoreCache(std::move(prior), ess, std::move(names), std::move(entries));
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid cache JSON: ") + e.what());
    } catch (const UsageError& e) {
        throw InputError(std::string("invalid cache prior: ") + e.what());
    }
}

void write_cache(const std::filesystem::path& path, const ScoreCache& cache) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << cache_to_json(cache);
}

ScoreCache read_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return cache_from_json(ss.str());
}

}  // namespace bnmc
