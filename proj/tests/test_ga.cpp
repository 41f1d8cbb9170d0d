#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "ifpc/ga.hpp"

using namespace ifpc;

namespace {

double sphere(const Genome& g) {
    double s = 0.0;
    for (double v : g.genes) s += v * v;
    return s;
}

std::vector<GeneBounds> box(std::size_t n, double lo, double hi) {
    return std::vector<GeneBounds>(n, GeneBounds{lo, hi});
}

} // namespace

TEST_CASE("genetic search minimizes the sphere function") {
    GaConfig cfg;
    cfg.population_size = 40;
    cfg.max_generations = 200;
    cfg.stall_generations = 200;  // disable early stop for this check
    cfg.mutation_sigma = 0.02;    // fine steps suit a smooth unimodal bowl
    cfg.seed = 7;
    auto res = run_ga(sphere, box(4, -5.0, 5.0), cfg);
    CHECK(res.best_fitness < 1e-3);
    CHECK(res.best_genome.genes.size() == 4);
    for (double v : res.best_genome.genes) {
        CHECK(v >= -5.0);
        CHECK(v <= 5.0);
    }
}

TEST_CASE("identical seeds give bit-identical runs") {
    GaConfig cfg;
    cfg.population_size = 20;
    cfg.max_generations = 40;
    cfg.seed = 123456789;
    auto r1 = run_ga(sphere, box(3, -2.0, 2.0), cfg);
    auto r2 = run_ga(sphere, box(3, -2.0, 2.0), cfg);
    REQUIRE(r1.history.size() == r2.history.size());
    for (std::size_t i = 0; i < r1.history.size(); ++i)
        CHECK(r1.history[i] == r2.history[i]);  // exact, not approximate
    REQUIRE(r1.best_genome.genes.size() == r2.best_genome.genes.size());
    for (std::size_t i = 0; i < r1.best_genome.genes.size(); ++i)
        CHECK(r1.best_genome.genes[i] == r2.best_genome.genes[i]);

    cfg.seed = 42;
    auto r3 = run_ga(sphere, box(3, -2.0, 2.0), cfg);
    bool any_difference = r3.history.size() != r1.history.size();
    for (std::size_t i = 0;
         !any_difference && i < std::min(r1.history.size(), r3.history.size());
         ++i)
        any_difference = r1.history[i] != r3.history[i];
    CHECK(any_difference);
}

TEST_CASE("elitism keeps the best-fitness trace non-increasing") {
    for (std::uint64_t seed : {1ull, 9ull, 77ull}) {
        GaConfig cfg;
        cfg.population_size = 16;
        cfg.max_generations = 60;
        cfg.seed = seed;
        auto res = run_ga(sphere, box(5, -3.0, 3.0), cfg);
        for (std::size_t i = 1; i < res.history.size(); ++i)
            CHECK(res.history[i] <= res.history[i - 1]);
    }
}

TEST_CASE("search stops once the best fitness stalls") {
    GaConfig cfg;
    cfg.population_size = 10;
    cfg.max_generations = 500;
    cfg.stall_generations = 8;
    cfg.stall_tolerance = 1e-9;
    auto flat = [](const Genome&) { return 3.0; };
    auto res = run_ga(flat, box(2, 0.0, 1.0), cfg);
    CHECK(res.generations_run == 8);
    CHECK(res.best_fitness == 3.0);
}

TEST_CASE("every evaluated genome respects its bounds") {
    GaConfig cfg;
    cfg.population_size = 12;
    cfg.max_generations = 30;
    cfg.mutation_sigma = 0.5;  // aggressive mutation stresses the clamping
    cfg.seed = 5;
    int violations = 0;
    auto counting = [&violations](const Genome& g) {
        for (std::size_t j = 0; j < g.genes.size(); ++j) {
            if (g.genes[j] < g.bounds[j].lo || g.genes[j] > g.bounds[j].hi)
                ++violations;
        }
        return sphere(g);
    };
    run_ga(counting, box(3, -1.0, 4.0), cfg);
    CHECK(violations == 0);
}

TEST_CASE("configuration and bounds validation") {
    GaConfig cfg;
    auto bounds = box(2, 0.0, 1.0);

    GaConfig bad = cfg;
    bad.population_size = 3;
    CHECK_THROWS_AS(run_ga(sphere, bounds, bad), std::invalid_argument);

    bad = cfg;
    bad.crossover_rate = 1.5;
    CHECK_THROWS_AS(run_ga(sphere, bounds, bad), std::invalid_argument);

    bad = cfg;
    bad.elitism_count = bad.population_size;
    CHECK_THROWS_AS(run_ga(sphere, bounds, bad), std::invalid_argument);

    bad = cfg;
    bad.stall_generations = 0;
    CHECK_THROWS_AS(run_ga(sphere, bounds, bad), std::invalid_argument);

    CHECK_THROWS_AS(run_ga(sphere, {}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(run_ga(sphere, box(2, 1.0, 1.0), cfg),
                    std::invalid_argument);

    Genome g;
    g.genes = {0.5, 2.0};
    g.bounds = bounds;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g.genes = {0.5};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g.genes = {0.5, 0.5};
    CHECK_NOTHROW(g.validate());
}
