#include "bnmc/sampler.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace bnmc {

void ChainConfig::validate() const {
    if (steps < 1) throw UsageError("steps must be at least 1");
    if (thin < 1) throw UsageError("thin must be at least 1");
    if (burn_in >= steps) throw UsageError("burn-in must be smaller than the number of steps");
    if (start == StartKind::Given && !start_dag) throw UsageError("a given start needs a start DAG");
    weights.validate();
}

double acceptance_probability(double log_ratio) {
    return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

bool accept_move(double log_ratio, double u) { return std::log(u) < log_ratio; }

Dag random_start(const ScoreCache& cache, Rng& rng) {
    const StructPrior& prior = cache.prior();
    const std::size_t n = prior.n_nodes();
    // Random linear extension of the retained edges.
    std::vector<std::size_t> order;
    NodeSet placed = 0;
    while (order.size() < n) {
        std::vector<std::size_t> ready;
        for (std::size_t v = 0; v < n; ++v)
            if (!contains(placed, v) && (prior.required(v) & ~placed) == 0) ready.push_back(v);
        const std::size_t v = ready[rng.index(ready.size())];
        order.push_back(v);
        placed |= bit(v);
    }
    std::vector<NodeSet> parents(n, 0);
    NodeSet before = 0;
    for (std::size_t v : order) {
        std::vector<NodeSet> options;
        for (const auto& e : cache.entries(v))
            if ((e.parents & ~before) == 0) options.push_back(e.parents);
        parents[v] = options[rng.index(options.size())];
        before |= bit(v);
    }
    return Dag(std::move(parents));
}

namespace {

void require_compatible(const ScoreCache& cache, const StructPrior& prior) {
    if (cache.n_nodes() != prior.n_nodes()) throw InputError("cache and prior disagree on the number of nodes");
    if (!(cache.prior() == prior)) throw InputError("cache was built under a different structural prior");
}

// Runs `steps` steps from `start`; global step numbers start after `offset`.
void extend(Trace& trace, const ScoreCache& cache, const StructPrior& prior, Dag current, std::size_t steps,
            std::size_t offset, Rng& rng, const MoveWeights& weights, std::size_t burn_in, std::size_t thin,
            const LogPriorRatio& log_prior_ratio) {
    double current_score = total_score(current, cache);
    std::string current_hex = encode_dag(current);
    trace.records.reserve(trace.records.size() + steps / thin + 1);

    for (std::size_t t = offset + 1; t <= offset + steps; ++t) {
        const MoveFamily family = draw_family(weights, rng);
        Proposal proposal = propose(family, current, prior, cache, rng);
        bool accepted = false;
        if (!proposal.degenerate) {
            const double proposed_score = total_score(proposal.proposed, cache);
            const double log_ratio = proposed_score - current_score +
                                     log_prior_ratio(current, proposal.proposed) + proposal.log_hastings;
            accepted = accept_move(log_ratio, rng.uniform_open());
            if (accepted) {
                current = std::move(proposal.proposed);
                current_score = proposed_score;
                current_hex = encode_dag(current);
                assert(is_acyclic(current.parent_sets()));
                assert(prior.admits(current));
            }
        }
        if (t > burn_in && (t - burn_in) % thin == 0)
            trace.records.push_back({t, proposal.kind, accepted, proposal.degenerate, current_score, current_hex});
    }
    trace.header.steps = offset + steps;
}

}  // namespace

Trace run_chain(const ScoreCache& cache, const StructPrior& prior, const ChainConfig& config,
                const LogPriorRatio& log_prior_ratio) {
    config.validate();
    require_compatible(cache, prior);
    Rng rng(config.seed, config.stream);

    Dag start;
    switch (config.start) {
        case StartKind::Empty: start = prior.retained_dag(); break;
        case StartKind::Random: start = random_start(cache, rng); break;
        case StartKind::Given:
            start = *config.start_dag;
            if (start.n_nodes() != prior.n_nodes()) throw InputError("start DAG has the wrong number of nodes");
            if (!prior.admits(start)) throw InputError("start DAG is not admissible under the structural prior");
            break;
    }

    Trace trace;
    trace.header.n_nodes = prior.n_nodes();
    trace.header.nodes = cache.names();
    trace.header.seed = config.seed;
    trace.header.stream = config.stream;
    trace.header.ess = cache.ess();
    trace.header.weights = config.weights;
    trace.header.burn_in = config.burn_in;
    trace.header.thin = config.thin;
    extend(trace, cache, prior, std::move(start), config.steps, 0, rng, config.weights, config.burn_in, config.thin,
           log_prior_ratio);
    return trace;
}

Trace resume_chain(const Trace& trace, const ScoreCache& cache, const StructPrior& prior, std::size_t extra_steps,
                   std::uint64_t seed, const LogPriorRatio& log_prior_ratio) {
    if (trace.empty()) throw InputError("cannot resume an empty trace");
    if (trace.header.n_nodes != cache.n_nodes()) throw InputError("trace and cache disagree on the number of nodes");
    require_compatible(cache, prior);
    if (extra_steps == 0) return trace;

    Trace out = trace;
    const Dag last = trace.dag(trace.size() - 1);
    if (!prior.admits(last)) throw InputError("last trace state is not admissible under the structural prior");
    out.header.seed = seed;
    out.header.stream = 0;
    Rng rng(seed, 0);
    extend(out, cache, prior, last, extra_steps, trace.header.steps, rng, trace.header.weights, trace.header.burn_in,
           trace.header.thin, log_prior_ratio);
    return out;
}

TraceCheck check_trace(const Trace& trace, const ScoreCache& cache, const StructPrior& prior, double tolerance) {
    TraceCheck check;
    bool flagged = false;
    auto flag = [&](std::size_t k) {
        if (!flagged) check.first_bad_record = k;
        flagged = true;
    };
    for (std::size_t k = 0; k < trace.size(); ++k) {
        Dag dag;
        try {
            dag = trace.dag(k);
        } catch (const GraphError&) {
            check.acyclic = false;
            flag(k);
            continue;
        }
        if (!prior.admits(dag)) {
            check.admissible = false;
            flag(k);
            continue;
        }
        const double err = std::abs(total_score(dag, cache) - trace.records[k].log_score);
        check.max_score_error = std::max(check.max_score_error, err);
        if (!(err <= tolerance)) {
            check.scores_match = false;
            flag(k);
        }
    }
    return check;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
    const auto& h = trace.header;
    std::string nodes;
    for (std::size_t i = 0; i < h.nodes.size(); ++i) nodes += (i ? "," : "") + h.nodes[i];
    out << "# n_nodes=" << h.n_nodes << '\n'
        << "# nodes=" << nodes << '\n'
        << "# rng=" << h.rng << '\n'
        << "# seed=" << h.seed << '\n'
        << "# stream=" << h.stream << '\n'
        << "# ess=" << std::setprecision(17) << h.ess << '\n'
        << "# weights=" << h.weights.to_string() << '\n'
        << "# steps=" << h.steps << '\n'
        << "# burn_in=" << h.burn_in << '\n'
        << "# thin=" << h.thin << '\n'
        << "step,move,accepted,degenerate,log_score,dag_hex\n";
    for (const auto& r : trace.records) {
        out << r.step << ',' << to_string(r.move) << ',' << (r.accepted ? 1 : 0) << ',' << (r.degenerate ? 1 : 0)
            << ',' << std::setprecision(17) << r.log_score << ',' << r.dag_hex << '\n';
    }
}

Trace parse_trace_csv(std::istream& in) {
    Trace trace;
    std::map<std::string, std::string> meta;
    std::string line;
    bool saw_columns = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            meta[key] = line.substr(eq + 1);
            continue;
        }
        if (!saw_columns) {
            if (line != "step,move,accepted,degenerate,log_score,dag_hex")
                throw InputError("trace is missing its column header");
            saw_columns = true;
            continue;
        }
        std::stringstream ss(line);
        std::string cells[6];
        for (auto& c : cells) std::getline(ss, c, ',');
        TraceRecord r;
        try {
            r.step = std::stoull(cells[0]);
            r.move = parse_move_kind(cells[1]);
            r.accepted = cells[2] == "1";
            r.degenerate = cells[3] == "1";
            r.log_score = std::stod(cells[4]);
        } catch (const std::logic_error&) {
            throw InputError("malformed trace record at line " + std::to_string(line_no));
        }
        r.dag_hex = cells[5];
        if (r.dag_hex.empty()) throw InputError("malformed trace record at line " + std::to_string(line_no));
        trace.records.push_back(std::move(r));
    }
    if (!saw_columns) throw InputError("trace is empty");

    auto& h = trace.header;
    try {
        h.n_nodes = std::stoull(meta.at("n_nodes"));
        h.rng = meta.count("rng") ? meta["rng"] : std::string(Rng::kName);
        h.seed = meta.count("seed") ? std::stoull(meta["seed"]) : 0;
        h.stream = meta.count("stream") ? std::stoull(meta["stream"]) : 0;
        h.ess = meta.count("ess") ? std::stod(meta["ess"]) : 1.0;
        if (meta.count("weights")) h.weights = MoveWeights::parse(meta["weights"]);
        h.steps = meta.count("steps") ? std::stoull(meta["steps"])
                                      : (trace.records.empty() ? 0 : trace.records.back().step);
        h.burn_in = meta.count("burn_in") ? std::stoull(meta["burn_in"]) : 0;
        h.thin = meta.count("thin") ? std::stoull(meta["thin"]) : 1;
    } catch (const std::out_of_range&) {
        throw InputError("trace header lacks n_nodes");
    } catch (const std::invalid_argument&) {
        throw InputError("malformed trace header");
    } catch (const UsageError& e) {
        throw InputError(std::string("malformed trace header: ") + e.what());
    }
    if (meta.count("nodes") && !meta["nodes"].empty()) {
        std::stringstream ss(meta["nodes"]);
        std::string name;
        while (std::getline(ss, name, ',')) h.nodes.push_back(name);
    }
    if (h.nodes.empty())
        for (std::size_t v = 0; v < h.n_nodes; ++v) h.nodes.push_back(std::to_string(v));
    if (h.nodes.size() != h.n_nodes) throw InputError("trace header node list disagrees with n_nodes");
    return trace;
}

Trace read_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return parse_trace_csv(in);
}

}  // namespace bnmc
