// bnmc: simulate -> cache -> sample -> query, plus exact enumeration.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "artifacts.hpp"
#include "bnmc/data.hpp"
#include "bnmc/errors.hpp"
#include "bnmc/graph.hpp"
#include "bnmc/oracle.hpp"
#include "bnmc/prior.hpp"
#include "bnmc/queries.hpp"
#include "bnmc/sampler.hpp"
#include "bnmc/scoring.hpp"
#include "bnmc/simulate.hpp"

namespace fs = std::filesystem;

namespace bnmc::cli {
namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct SimulateArgs {
    std::string dag, cpt, network, out;
    bool benchmark = false;
    std::size_t n = 0;
    std::uint64_t seed = 1;
};

struct CacheArgs {
    std::string data, schema, ban, retain, out;
    bool header = true;
    double ess = 1.0;
    std::optional<std::size_t> max_parents;
    std::size_t budget = CacheBuildOptions{}.entry_budget;
    unsigned threads = 1;
};

struct SampleArgs {
    std::string cache, start = "empty", weights = MoveWeights{}.to_string(), resume, out;
    std::size_t steps = 100'000, burn_in = 0, thin = 1;
    std::uint64_t seed = 1, stream = 0;
};

struct QueryArgs {
    std::string trace, feature, out, format;
};

struct ExactArgs {
    std::string cache, out;
    unsigned threads = 1;
};

// ---------------------------------------------------------------------------

int run_simulate(const SimulateArgs& a, Manifest& m) {
    if (a.n == 0) throw UsageError("--n must be at least 1");
    DiscreteNetwork net;
    if (a.benchmark) {
        if (!a.dag.empty() || !a.cpt.empty() || !a.network.empty())
            throw UsageError("--benchmark cannot be combined with --dag, --cpt or --network");
        net = benchmark_spec().network;
    } else if (!a.network.empty()) {
        net = read_network(a.network);
        m.input(a.network);
    } else if (!a.dag.empty() && !a.cpt.empty()) {
        net = bind_cpts(read_dag_json(a.dag), slurp(a.cpt));
        m.input(a.dag);
        m.input(a.cpt);
    } else if (!a.cpt.empty()) {
        net = parse_network_json(slurp(a.cpt));
        m.input(a.cpt);
    } else {
        throw UsageError("give --benchmark, --network, or --dag with --cpt");
    }
    m.flag("n", a.n);
    m.flag("benchmark", a.benchmark);
    m.seed("seed", a.seed);

    const Dataset data = forward_sample(net, a.n, a.seed);
    std::ostringstream csv;
    write_csv(csv, data);
    m.emit(a.out, csv.str());
    return 0;
}

// Edge list "a->b,c->d", or a path to an adjacency CSV over the data's columns.
std::vector<NodeSet> edge_masks(const std::string& spec, const std::vector<std::string>& names, Manifest& m) {
    std::vector<NodeSet> masks(names.size(), 0);
    if (spec.empty()) return masks;
    std::error_code ec;
    if (fs::is_regular_file(spec, ec)) {
        m.input(spec);
        try {
            return read_adjacency_csv(spec, names);
        } catch (const GraphError& e) {
            throw UsageError(std::string("bad constraint matrix: ") + e.what());
        }
    }
    for (auto [from, to] : parse_edge_list(spec, names)) masks[to] |= bit(from);
    return masks;
}

int run_cache(const CacheArgs& a, Manifest& m) {
    Schema schema;
    if (!a.schema.empty()) {
        schema = read_schema(a.schema);
        m.input(a.schema);
    }
    const Dataset data = load_csv(a.data, a.header, a.schema.empty() ? nullptr : &schema);
    m.input(a.data);
    const std::size_t n = data.n_vars();
    if (n > kMaxNodes) throw UsageError("at most 64 variables are supported");

    std::size_t max_parents = 0;
    if (a.max_parents) {
        max_parents = *a.max_parents;
        if (max_parents > n - 1)
            throw UsageError("--max-parents " + std::to_string(max_parents) + " exceeds n-1 = " + std::to_string(n - 1));
    } else if (n <= 8) {
        max_parents = n - 1;
    } else {
        throw UsageError("--max-parents is required for more than 8 variables");
    }
    if (a.threads == 0) throw UsageError("--threads must be at least 1");

    const StructPrior prior(n, max_parents, edge_masks(a.ban, data.names(), m),
                            edge_masks(a.retain, data.names(), m));
    m.flag("header", a.header);
    m.flag("ess", a.ess);
    m.flag("max_parents", max_parents);
    m.flag("ban", a.ban);
    m.flag("retain", a.retain);
    m.flag("threads", a.threads);

    CacheBuildOptions opts;
    opts.entry_budget = a.budget;
    opts.threads = a.threads;
    const ScoreCache cache = build_cache(data, prior, a.ess, opts);
    m.emit(a.out, cache_to_json(cache));
    return 0;
}

Dag read_start_dag(const std::string& path, const std::vector<std::string>& names, Manifest& m) {
    m.input(path);
    if (fs::path(path).extension() == ".csv") return Dag(read_adjacency_csv(path, names));
    const NamedDag named = read_dag_json(path);
    if (named.names.size() != names.size()) throw InputError("start DAG has the wrong number of nodes");
    // Re-index by name onto the cache's node order.
    std::vector<std::size_t> to_cache(names.size());
    for (std::size_t k = 0; k < named.names.size(); ++k) {
        const auto it = std::find(names.begin(), names.end(), named.names[k]);
        if (it == names.end()) throw InputError("start DAG node '" + named.names[k] + "' is not in the cache");
        to_cache[k] = static_cast<std::size_t>(it - names.begin());
    }
    std::vector<NodeSet> parents(names.size(), 0);
    for (std::size_t c = 0; c < names.size(); ++c)
        for_each_member(named.dag.parents(c), [&](std::size_t p) { parents[to_cache[c]] |= bit(to_cache[p]); });
    return Dag(std::move(parents));
}

int run_sample(const SampleArgs& a, Manifest& m) {
    const ScoreCache cache = read_cache(a.cache);
    m.input(a.cache);
    m.seed("seed", a.seed);
    m.seed("stream", a.stream);
    m.flag("steps", a.steps);

    Trace trace;
    if (!a.resume.empty()) {
        m.input(a.resume);
        m.flag("resume", a.resume);
        trace = resume_chain(read_trace(a.resume), cache, cache.prior(), a.steps, a.seed);
    } else {
        ChainConfig config;
        config.steps = a.steps;
        config.seed = a.seed;
        config.stream = a.stream;
        config.weights = MoveWeights::parse(a.weights);
        config.burn_in = a.burn_in;
        config.thin = a.thin;
        if (a.start == "empty") {
            config.start = StartKind::Empty;
        } else if (a.start == "random") {
            config.start = StartKind::Random;
        } else if (a.start.starts_with("dag:")) {
            config.start = StartKind::Given;
            config.start_dag = read_start_dag(a.start.substr(4), cache.names(), m);
        } else {
            throw UsageError("--start must be empty, random or dag:<file>");
        }
        m.flag("start", a.start);
        m.flag("weights", config.weights.to_string());
        m.flag("burn_in", a.burn_in);
        m.flag("thin", a.thin);
        trace = run_chain(cache, cache.prior(), config);
    }
    std::ostringstream csv;
    write_trace_csv(csv, trace);
    m.emit(a.out, csv.str());
    return 0;
}

int run_query(const QueryArgs& a, Manifest& m) {
    const Trace trace = read_trace(a.trace);
    m.input(a.trace);
    const FeatureQuery query = FeatureQuery::parse(a.feature, trace.header.nodes);
    const QueryReport report = estimate(trace, query);

    std::string format = a.format;
    if (format.empty()) format = fs::path(a.out).extension() == ".csv" ? "csv" : "json";
    m.flag("feature", a.feature);
    m.flag("format", format);
    const std::string body = format == "csv" ? report_to_csv(report) : report_to_json(report);
    if (a.out.empty() || a.out == "-") {
        std::cout << body;
        return 0;
    }
    m.emit(a.out, body);
    return 0;
}

int run_exact(const ExactArgs& a, Manifest& m) {
    const ScoreCache cache = read_cache(a.cache);
    m.input(a.cache);
    if (cache.n_nodes() > kMaxEnumerationNodes)
        throw UsageError("exact enumeration is limited to " + std::to_string(kMaxEnumerationNodes) +
                         " nodes; this cache has " + std::to_string(cache.n_nodes()));
    m.flag("threads", a.threads);
    const std::string body = exact_report_json(exact_posterior(cache));
    if (a.out.empty() || a.out == "-") {
        std::cout << body;
        return 0;
    }
    m.emit(a.out, body);
    return 0;
}

}  // namespace
}  // namespace bnmc::cli

int main(int argc, char** argv) {
    using namespace bnmc;
    using namespace bnmc::cli;

    CLI::App app{"Structure MCMC for discrete Bayesian networks", "bnmc"};
    app.set_version_flag("--version", std::string("bnmc ") + BNMC_VERSION);
    app.require_subcommand(1);
    const std::string version = std::string("bnmc ") + BNMC_VERSION;

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Forward-sample a data CSV from a DAG with CPTs");
    simulate->set_version_flag("--version", version);
    simulate->add_flag("--benchmark", sim.benchmark, "Use the built-in five-node benchmark network");
    simulate->add_option("--network", sim.network, "Network JSON with nodes, parents and cpts");
    simulate->add_option("--dag", sim.dag, "DAG JSON (use with --cpt)");
    simulate->add_option("--cpt", sim.cpt, "CPT JSON list, or a full network JSON on its own");
    simulate->add_option("--n", sim.n, "Number of rows")->required();
    simulate->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
    simulate->add_option("--out", sim.out, "Output CSV")->required();

    CacheArgs cac;
    auto* cache = app.add_subcommand("cache", "Score every admissible parent set with BDeu");
    cache->set_version_flag("--version", version);
    cache->add_option("--data", cac.data, "Data CSV of 0-based integer categories")->required();
    cache->add_flag("--header,!--no-header", cac.header, "First row names the columns (default on)");
    cache->add_option("--schema", cac.schema, "Arity sidecar {\"arities\": {...}}");
    cache->add_option("--ess", cac.ess, "BDeu equivalent sample size")->capture_default_str();
    cache->add_option("--max-parents", cac.max_parents, "Parent limit (default n-1 when n <= 8)");
    cache->add_option("--ban", cac.ban, "Forbidden edges: \"a->b,c->d\" or an adjacency CSV");
    cache->add_option("--retain", cac.retain, "Required edges: \"a->b,c->d\" or an adjacency CSV");
    cache->add_option("--budget", cac.budget, "Largest number of cache entries")->capture_default_str();
    cache->add_option("--threads", cac.threads, "Worker threads")->capture_default_str();
    cache->add_option("--out", cac.out, "Output cache JSON")->required();

    SampleArgs smp;
    auto* sample = app.add_subcommand("sample", "Run a structure MCMC chain over a score cache");
    sample->set_version_flag("--version", version);
    sample->add_option("--cache", smp.cache, "Cache JSON")->required();
    sample->add_option("--steps", smp.steps, "Chain steps (extra steps with --resume)")->capture_default_str();
    sample->add_option("--seed", smp.seed, "RNG seed")->capture_default_str();
    sample->add_option("--stream", smp.stream, "RNG stream for parallel chains")->capture_default_str();
    sample->add_option("--start", smp.start, "empty | random | dag:<file> (DAG JSON or adjacency CSV)")
        ->capture_default_str();
    sample->add_option("--weights", smp.weights, "Move mixture, e.g. single=0.8,rev=0.1,mbr=0.1")
        ->capture_default_str();
    sample->add_option("--burn-in", smp.burn_in, "Steps dropped before recording")->capture_default_str();
    sample->add_option("--thin", smp.thin, "Record every k-th step")->capture_default_str();
    sample->add_option("--resume", smp.resume, "Continue this trace from its last state");
    sample->add_option("--out", smp.out, "Output trace CSV")->required();

    QueryArgs qry;
    auto* query = app.add_subcommand("query", "Posterior feature estimates from a trace");
    query->set_version_flag("--version", version);
    query->add_option("--trace", qry.trace, "Trace CSV")->required();
    query->add_option("--feature", qry.feature,
                      "arc:a->b | adj:a-b | all-arcs | all-adj | dag-freq:k | score-trace[:sorted]; "
                      "score-trace reports log score minus the trace maximum")
        ->required();
    query->add_option("--format", qry.format, "json or csv (default from --out extension)")
        ->check(CLI::IsMember({"json", "csv"}));
    query->add_option("--out", qry.out, "Output report (stdout when omitted)");

    ExactArgs ext;
    auto* exact = app.add_subcommand("exact", "Exact posterior by enumerating every admissible DAG (n <= 5)");
    exact->set_version_flag("--version", version);
    exact->add_option("--cache", ext.cache, "Cache JSON")->required();
    exact->add_option("--threads", ext.threads, "Worker cap (enumeration runs on one thread)")->capture_default_str();
    exact->add_option("--out", ext.out, "Output report JSON (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        Manifest manifest(app.get_subcommands().front()->get_name(), argc, argv);
        if (*simulate) return run_simulate(sim, manifest);
        if (*cache) return run_cache(cac, manifest);
        if (*sample) return run_sample(smp, manifest);
        if (*query) return run_query(qry, manifest);
        if (*exact) return run_exact(ext, manifest);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InputError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
