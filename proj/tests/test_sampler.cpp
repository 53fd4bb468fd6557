#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "bnmc/oracle.hpp"
#include "bnmc/sampler.hpp"
#include "oracles.hpp"

using namespace bnmc;

namespace {

Dataset chain_data(std::size_t rows, std::uint64_t seed) {
    // x0 -> x1 -> x2 with strong copying.
    Rng rng(seed, 5);
    std::vector<std::vector<Category>> cols(3);
    for (std::size_t r = 0; r < rows; ++r) {
        const Category a = rng.uniform() < 0.5;
        const Category b = rng.uniform() < 0.8 ? a : 1 - a;
        const Category c = rng.uniform() < 0.8 ? b : 1 - b;
        cols[0].push_back(a);
        cols[1].push_back(b);
        cols[2].push_back(c);
    }
    return Dataset({"x0", "x1", "x2"}, {2, 2, 2}, cols);
}

}  // namespace

TEST_CASE("acceptance rule") {
    CHECK(acceptance_probability(-std::log(2.0)) == doctest::Approx(0.5));
    CHECK(acceptance_probability(3.0) == 1.0);
    CHECK(accept_move(-std::log(2.0), 0.49));
    CHECK_FALSE(accept_move(-std::log(2.0), 0.51));
    CHECK(accept_move(0.0, 0.999999));
    CHECK_FALSE(accept_move(-1e300, 0.5));
}

TEST_CASE("single-step acceptance at a local maximum is one half") {
    // Two nodes: 0->1 scores 0, both neighbors (delete, reverse) score -ln 2,
    // and every neighborhood has size 2.
    const StructPrior prior = StructPrior::unconstrained(2);
    const double l2 = std::log(2.0);
    const ScoreCache cache(prior, 1.0, {"x", "y"},
                           {{{0, 0.0}, {bit(1), 0.0}}, {{0, -l2}, {bit(0), 0.0}}});
    ChainConfig cfg;
    cfg.steps = 1;
    cfg.start = StartKind::Given;
    cfg.start_dag = Dag(std::vector<NodeSet>{0, bit(0)});
    cfg.weights = MoveWeights::parse("single=1");
    std::size_t accepted = 0;
    const std::size_t runs = 20000;
    for (std::size_t s = 0; s < runs; ++s) {
        cfg.seed = s;
        accepted += run_chain(cache, prior, cfg).records[0].accepted;
    }
    const double rate = static_cast<double>(accepted) / runs;
    CHECK(std::abs(rate - 0.5) < 4 * std::sqrt(0.25 / runs));
}

TEST_CASE("run_chain is deterministic and records what it was asked to") {
    const Dataset d = chain_data(200, 1);
    const StructPrior prior = StructPrior::unconstrained(3);
    const ScoreCache cache = build_cache(d, prior, 1.0);
    ChainConfig cfg;
    cfg.steps = 2000;
    cfg.seed = 42;
    const Trace a = run_chain(cache, prior, cfg);
    const Trace b = run_chain(cache, prior, cfg);
    REQUIRE(a.size() == 2000);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.records[k].dag_hex == b.records[k].dag_hex);
        CHECK(a.records[k].log_score == b.records[k].log_score);
    }
    CHECK(check_trace(a, cache, prior).ok());

    cfg.thin = 10;
    cfg.burn_in = 100;
    const Trace t = run_chain(cache, prior, cfg);
    CHECK(t.size() == 190);
    CHECK(t.records.front().step == 110);
    CHECK(t.records.back().step == 2000);

    cfg.seed = 43;
    cfg.thin = 1;
    cfg.burn_in = 0;
    const Trace c = run_chain(cache, prior, cfg);
    bool differs = false;
    for (std::size_t k = 0; k < c.size(); ++k) differs |= c.records[k].dag_hex != a.records[k].dag_hex;
    CHECK(differs);
}

TEST_CASE("consecutive records differ by at most one move") {
    const Dataset d = chain_data(100, 2);
    const StructPrior prior = StructPrior::unconstrained(3);
    const ScoreCache cache = build_cache(d, prior, 1.0);
    ChainConfig cfg;
    cfg.steps = 3000;
    cfg.weights = MoveWeights::parse("single=1");
    const Trace t = run_chain(cache, prior, cfg);
    for (std::size_t k = 1; k < t.size(); ++k) {
        const Dag x = t.dag(k - 1), y = t.dag(k);
        if (!t.records[k].accepted) {
            CHECK(x == y);
            continue;
        }
        std::size_t changed = 0;
        for (std::size_t v = 0; v < 3; ++v) changed += set_size(x.parents(v) ^ y.parents(v));
        CHECK((changed == 1 || changed == 2));
    }
}

TEST_CASE("retain and ban hold along the chain") {
    const Dataset d = oracle::random_dataset(4, 100, 6);
    std::vector<NodeSet> ban(4, 0), keep(4, 0);
    ban[3] = bit(0) | bit(1);
    keep[2] = bit(0);
    const StructPrior prior(4, 2, ban, keep);
    const ScoreCache cache = build_cache(d, prior, 1.0);
    for (StartKind start : {StartKind::Empty, StartKind::Random}) {
        ChainConfig cfg;
        cfg.steps = 5000;
        cfg.start = start;
        cfg.weights = MoveWeights::parse("single=0.4,rev=0.3,mbr=0.3");
        const Trace t = run_chain(cache, prior, cfg);
        const TraceCheck check = check_trace(t, cache, prior);
        CHECK(check.ok());
        for (std::size_t k = 0; k < t.size(); ++k) {
            const Dag g = t.dag(k);
            CHECK(g.has_edge(0, 2));
            CHECK_FALSE(g.has_edge(0, 3));
            CHECK_FALSE(g.has_edge(1, 3));
        }
    }
}

TEST_CASE("start validation and mismatches") {
    const StructPrior prior = StructPrior::unconstrained(3);
    const ScoreCache cache = constant_cache(prior);
    ChainConfig cfg;
    cfg.steps = 10;
    cfg.start = StartKind::Given;
    CHECK_THROWS_AS(run_chain(cache, prior, cfg), UsageError);

    std::vector<NodeSet> keep(3, 0);
    keep[1] = bit(0);
    const StructPrior keeps(3, 2, std::vector<NodeSet>(3, 0), keep);
    const ScoreCache kc = constant_cache(keeps);
    cfg.start_dag = Dag(3);
    CHECK_THROWS_AS(run_chain(kc, keeps, cfg), InputError);
    CHECK_THROWS_AS(run_chain(cache, keeps, cfg), InputError);

    cfg.start = StartKind::Empty;
    cfg.burn_in = 10;
    CHECK_THROWS_AS(run_chain(cache, prior, cfg), UsageError);
}

TEST_CASE("random start respects the prior") {
    std::vector<NodeSet> ban(5, 0), keep(5, 0);
    ban[0] = bit(4);
    keep[3] = bit(1);
    keep[1] = bit(4);
    const StructPrior prior(5, 2, ban, keep);
    const ScoreCache cache = constant_cache(prior);
    Rng rng(8);
    std::map<std::string, int> seen;
    for (int k = 0; k < 500; ++k) {
        const Dag g = random_start(cache, rng);
        CHECK(prior.admits(g));
        ++seen[encode_dag(g)];
    }
    CHECK(seen.size() > 50);
}

TEST_CASE("resume continues deterministically") {
    const Dataset d = chain_data(200, 3);
    const StructPrior prior = StructPrior::unconstrained(3);
    const ScoreCache cache = build_cache(d, prior, 1.0);
    ChainConfig cfg;
    cfg.steps = 1000;
    cfg.seed = 7;
    const Trace first = run_chain(cache, prior, cfg);
    CHECK(resume_chain(first, cache, prior, 0, 9).size() == first.size());

    const Trace a = resume_chain(first, cache, prior, 1000, 9);
    const Trace b = resume_chain(first, cache, prior, 1000, 9);
    REQUIRE(a.size() == 2000);
    CHECK(a.records.back().dag_hex == b.records.back().dag_hex);
    CHECK(a.records[1000].step == 1001);
    CHECK(a.header.steps == 2000);
    CHECK(check_trace(a, cache, prior).ok());

    // Through the CSV round trip as well.
    std::stringstream buf;
    write_trace_csv(buf, first);
    const Trace parsed = parse_trace_csv(buf);
    const Trace c = resume_chain(parsed, cache, prior, 1000, 9);
    CHECK(c.records.back().dag_hex == a.records.back().dag_hex);
    CHECK(c.records.back().log_score == a.records.back().log_score);

    const ScoreCache other = constant_cache(StructPrior::unconstrained(4));
    CHECK_THROWS_AS(resume_chain(first, other, StructPrior::unconstrained(4), 10, 1), InputError);
    CHECK_THROWS_AS(resume_chain(Trace{}, cache, prior, 10, 1), InputError);
}

TEST_CASE("trace CSV round trip and validation") {
    const StructPrior prior = StructPrior::unconstrained(3);
    const ScoreCache cache = build_cache(chain_data(50, 4), prior, 1.5);
    ChainConfig cfg;
    cfg.steps = 300;
    cfg.thin = 3;
    cfg.weights = MoveWeights::parse("single=0.5,rev=0.25,mbr=0.25");
    const Trace t = run_chain(cache, prior, cfg);
    std::stringstream buf;
    write_trace_csv(buf, t);
    const std::string text = buf.str();
    CHECK(text.find("# n_nodes=3") != std::string::npos);
    CHECK(text.find("# seed=1") != std::string::npos);
    CHECK(text.find("# rng=mt19937_64") != std::string::npos);
    CHECK(text.find("step,move,accepted,degenerate,log_score,dag_hex\n") != std::string::npos);

    const Trace back = parse_trace_csv(buf);
    REQUIRE(back.size() == t.size());
    CHECK(back.header.nodes == t.header.nodes);
    CHECK(back.header.ess == 1.5);
    CHECK(back.header.thin == 3);
    CHECK(back.header.weights.rev == 0.25);
    for (std::size_t k = 0; k < t.size(); ++k) {
        CHECK(back.records[k].log_score == t.records[k].log_score);
        CHECK(back.records[k].move == t.records[k].move);
        CHECK(back.records[k].accepted == t.records[k].accepted);
    }

    Trace bad = t;
    bad.records[5].log_score += 1e-6;
    const TraceCheck check = check_trace(bad, cache, prior);
    CHECK_FALSE(check.scores_match);
    CHECK(check.first_bad_record == 5);
    bad = t;
    bad.records[2].dag_hex = "062";  // 0->1->2->0
    CHECK_FALSE(check_trace(bad, cache, prior).ok());

    std::istringstream junk("# n_nodes=2\nstep,move\n");
    CHECK_THROWS_AS(parse_trace_csv(junk), InputError);
}
