#include <doctest.h>

#include <cmath>
#include <map>

#include "bnmc/scoring.hpp"
#include "oracles.hpp"

using namespace bnmc;

namespace {

Dataset two_column(std::vector<Category> a, std::vector<Category> b) {
    return Dataset({"a", "b"}, {2, 2}, {std::move(a), std::move(b)});
}

}  // namespace

TEST_CASE("log_gamma agrees with std::lgamma") {
    for (double x : {1e-6, 0.001, 0.0625, 0.25, 0.5, 1.0, 1.5, 2.0, 3.7, 9.99, 10.0, 10.5, 42.0, 1e3, 1e5, 1e8}) {
        const double ref = std::lgamma(x);
        CHECK(std::abs(log_gamma(x) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
    CHECK(std::abs(log_gamma(1.0)) < 1e-14);
    CHECK(std::abs(log_gamma(2.0)) < 1e-14);
}

TEST_CASE("local_score examples") {
    const Dataset d = two_column({0, 0, 1, 1}, {0, 1, 1, 1});
    const Dataset col = two_column({1, 0, 1, 1}, {0, 0, 0, 0});
    CHECK(local_score(col, 0, 0, 1.0) == doctest::Approx(std::log(0.0390625)).epsilon(1e-12));
    CHECK(local_score(col, 0, 0, 1.0) == doctest::Approx(-3.2426).epsilon(1e-4));
    CHECK(local_score(d, 1, bit(0), 1.0) == doctest::Approx(-3.3604).epsilon(1e-4));
    // Independent product-of-Gammas check of both.
    CHECK(local_score(d, 1, bit(0), 1.0) ==
          doctest::Approx(std::log(oracle::bdeu_likelihood_direct(d, 1, {0}, 1.0))).epsilon(1e-12));

    const Dataset empty = d.select_rows(std::vector<std::size_t>{});
    CHECK(local_score(empty, 0, 0, 1.0) == 0.0);
    CHECK(local_score(empty, 1, bit(0), 3.0) == 0.0);

    CHECK_THROWS_AS(local_score(d, 0, 0, 0.0), UsageError);
    CHECK_THROWS_AS(local_score(d, 0, bit(0), 1.0), UsageError);
}

TEST_CASE("score equivalence on two nodes") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const Dataset d = oracle::random_dataset(2, 30 + seed, seed);
        const double fwd = local_score(d, 0, 0, 1.0) + local_score(d, 1, bit(0), 1.0);
        const double bwd = local_score(d, 1, 0, 1.0) + local_score(d, 0, bit(1), 1.0);
        CHECK(std::abs(fwd - bwd) < 1e-9);
    }
}

TEST_CASE("score equivalence for a v-structure-free three node reorientation") {
    // a->b->c and a<-b<-c are Markov equivalent.
    const Dataset d = oracle::random_dataset(3, 80, 99, 3);
    const double s1 = local_score(d, 0, 0, 2.0) + local_score(d, 1, bit(0), 2.0) + local_score(d, 2, bit(1), 2.0);
    const double s2 = local_score(d, 2, 0, 2.0) + local_score(d, 1, bit(2), 2.0) + local_score(d, 0, bit(1), 2.0);
    CHECK(std::abs(s1 - s2) < 1e-9);
}

TEST_CASE("local_score is row-order invariant and matches the direct product") {
    Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const Dataset d = oracle::random_dataset(4, 4, 500 + trial, 3);
        const std::size_t child = rng.index(4);
        std::vector<std::size_t> parents;
        NodeSet mask = 0;
        for (std::size_t v = 0; v < 4; ++v)
            if (v != child && rng.uniform() < 0.5) {
                parents.push_back(v);
                mask |= bit(v);
            }
        const double direct = std::log(oracle::bdeu_likelihood_direct(d, child, parents, 1.0));
        CHECK(std::abs(local_score(d, child, mask, 1.0) - direct) < 1e-9);

        std::vector<std::size_t> rev{3, 2, 1, 0};
        CHECK(std::abs(local_score(d.select_rows(rev), child, mask, 1.0) - local_score(d, child, mask, 1.0)) < 1e-12);
    }
}

TEST_CASE("strong dependence raises the family score") {
    std::vector<Category> x, y;
    Rng rng(8);
    for (int i = 0; i < 10000; ++i) {
        const Category a = rng.uniform() < 0.5 ? 1 : 0;
        x.push_back(a);
        y.push_back(rng.uniform() < 0.9 ? a : 1 - a);
    }
    const Dataset d = two_column(x, y);
    CHECK(local_score(d, 1, bit(0), 1.0) > local_score(d, 1, 0, 1.0));
}

TEST_CASE("sparse fallback matches the dense table") {
    // Seven parents of arity 30 overflow the dense table.
    std::vector<std::string> names;
    std::vector<std::size_t> arities;
    std::vector<std::vector<Category>> cols(8);
    Rng rng(12);
    for (std::size_t v = 0; v < 8; ++v) {
        names.push_back("x" + std::to_string(v));
        arities.push_back(30);
        for (int r = 0; r < 50; ++r) cols[v].push_back(static_cast<Category>(rng.index(2)));
    }
    const Dataset wide(names, arities, cols);
    const NodeSet parents = full_set(8) & ~bit(0);
    CHECK_THROWS_AS(counts(wide, 0, parents), ConfigurationOverflow);
    const double sparse = local_score(wide, 0, parents, 1.0);

    // Direct evaluation: only observed configurations contribute.
    const double q = std::pow(30.0, 7);
    const double r = 30.0;
    std::map<std::vector<Category>, std::map<Category, double>> tally;
    for (int row = 0; row < 50; ++row) {
        std::vector<Category> key;
        for (std::size_t v = 1; v < 8; ++v) key.push_back(cols[v][row]);
        tally[key][cols[0][row]] += 1;
    }
    double expected = 0;
    for (auto& [key, cell] : tally) {
        double nj = 0;
        for (auto& [k, c] : cell) {
            nj += c;
            expected += std::lgamma(1.0 / (q * r) + c) - std::lgamma(1.0 / (q * r));
        }
        expected += std::lgamma(1.0 / q) - std::lgamma(1.0 / q + nj);
    }
    CHECK(std::abs(sparse - expected) < 1e-7 * std::abs(expected));
}

TEST_CASE("cache entry counts") {
    const Dataset d = oracle::random_dataset(5, 40, 3);
    const ScoreCache full = build_cache(d, StructPrior::unconstrained(5), 1.0);
    CHECK(full.entry_count() == 80);
    for (std::size_t v = 0; v < 5; ++v) CHECK(full.entries(v).size() == 16);

    const ScoreCache two = build_cache(d, StructPrior(5, 2), 1.0);
    for (std::size_t v = 0; v < 5; ++v) CHECK(two.entries(v).size() == 11);

    std::vector<NodeSet> ban(5, 0);
    ban[0] = full_set(5) & ~bit(0);
    const ScoreCache banned = build_cache(d, StructPrior(5, 4, ban, std::vector<NodeSet>(5, 0)), 1.0);
    CHECK(banned.entries(0).size() == 1);
    CHECK(banned.entries(0)[0].parents == 0);
    CHECK_THROWS_AS(banned.score(0, bit(1)), CacheMiss);

    CacheBuildOptions tiny;
    tiny.entry_budget = 10;
    CHECK_THROWS_AS(build_cache(d, StructPrior::unconstrained(5), 1.0, tiny), CacheBudgetExceeded);
}

TEST_CASE("cache lookups equal fresh local scores, with and without threads") {
    const Dataset d = oracle::random_dataset(6, 120, 17, 3);
    const StructPrior prior(6, 3);
    CacheBuildOptions par;
    par.threads = 4;
    const ScoreCache serial = build_cache(d, prior, 1.0);
    const ScoreCache threaded = build_cache(d, prior, 1.0, par);
    Rng rng(2);
    for (int k = 0; k < 100; ++k) {
        const std::size_t v = rng.index(6);
        const auto sets = prior.admissible_parent_sets(v);
        const NodeSet s = sets[rng.index(sets.size())];
        CHECK(serial.score(v, s) == local_score(d, v, s, 1.0));
        CHECK(threaded.score(v, s) == serial.score(v, s));
    }
}

TEST_CASE("total_score decomposes") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.index(4);
        const Dataset d = oracle::random_dataset(n, 50, 700 + trial);
        const ScoreCache cache = build_cache(d, StructPrior::unconstrained(n), 1.0);
        const Dag g(oracle::random_dag_masks(n, n - 1, 0.5, rng));
        double sum = 0;
        for (std::size_t v = 0; v < n; ++v) sum += local_score(d, v, g.parents(v), 1.0);
        CHECK(std::abs(total_score(g, cache) - sum) < 1e-9);
    }
    const Dataset d = oracle::random_dataset(3, 20, 5);
    const ScoreCache cache = build_cache(d, StructPrior::unconstrained(3), 1.0);
    const Dag a(std::vector<NodeSet>{0, bit(0), 0});
    const Dag b(std::vector<NodeSet>{0, bit(0), bit(0) | bit(1)});
    CHECK(std::abs((total_score(b, cache) - total_score(a, cache)) - (cache.score(2, bit(0) | bit(1)) - cache.score(2, 0))) <
          1e-12);
}

TEST_CASE("benchmark DAG score against the product of Gammas on four rows") {
    // a..e binary, arcs a->b, a->c, c->d, b->e, d->e
    const Dataset d({"a", "b", "c", "d", "e"}, {2, 2, 2, 2, 2},
                    {{0, 1, 1, 0}, {0, 1, 0, 0}, {1, 1, 0, 0}, {0, 1, 1, 1}, {1, 0, 1, 0}});
    const std::vector<std::vector<std::size_t>> pa{{}, {0}, {0}, {2}, {1, 3}};
    std::vector<NodeSet> masks(5, 0);
    double like = 1.0;
    for (std::size_t v = 0; v < 5; ++v) {
        for (std::size_t p : pa[v]) masks[v] |= bit(p);
        like *= oracle::bdeu_likelihood_direct(d, v, pa[v], 1.0);
    }
    const ScoreCache cache = build_cache(d, StructPrior::unconstrained(5), 1.0);
    CHECK(std::abs(total_score(Dag(masks), cache) - std::log(like)) < 1e-9);
}

TEST_CASE("cache JSON round trip") {
    const Dataset d = oracle::random_dataset(4, 60, 23);
    std::vector<NodeSet> ban(4, 0), keep(4, 0);
    ban[0] = bit(3);
    keep[2] = bit(1);
    const ScoreCache cache = build_cache(d, StructPrior(4, 2, ban, keep), 2.5);
    const ScoreCache back = cache_from_json(cache_to_json(cache));
    CHECK(back.prior() == cache.prior());
    CHECK(back.ess() == 2.5);
    CHECK(back.names() == cache.names());
    for (std::size_t v = 0; v < 4; ++v) {
        REQUIRE(back.entries(v).size() == cache.entries(v).size());
        for (std::size_t k = 0; k < cache.entries(v).size(); ++k) {
            CHECK(back.entries(v)[k].parents == cache.entries(v)[k].parents);
            CHECK(back.entries(v)[k].score == cache.entries(v)[k].score);
        }
    }
    CHECK(parent_set_key(bit(1) | bit(3)) == "1,3");
    CHECK(parent_set_key(0).empty());
    CHECK(parse_parent_set_key("1,3") == (bit(1) | bit(3)));
    CHECK_THROWS_AS(cache_from_json(R"({"n": 2})"), InputError);
    CHECK_THROWS_AS(cache_from_json("[1,2"), InputError);
}

TEST_CASE("minimal cache JSON from the documented example shape") {
    const ScoreCache c = cache_from_json(R"({"n": 2, "ess": 1.0, "max_parents": 1,
        "scores": {"0": {"": -3.0, "1": -2.0}, "1": {"": -4.0, "0": -3.0}}})");
    CHECK(c.n_nodes() == 2);
    CHECK(c.score(0, bit(1)) == -2.0);
    CHECK_THROWS_AS(cache_from_json(R"({"n": 2, "ess": 1.0, "max_parents": 1,
        "scores": {"0": {"": -3.0}, "1": {"": -4.0, "0": -3.0}}})"),
                    InputError);
}
