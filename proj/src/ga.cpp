#include "ifpc/ga.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ifpc {

namespace {

/// 64-bit finalizer (splitmix64): decorrelates structured inputs so that
/// (seed, generation, slot) triples give independent-looking streams.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t generation,
                       std::uint64_t slot) {
    return std::mt19937_64(mix(mix(mix(seed) ^ generation) ^ slot));
}

struct Scored {
    Genome genome;
    double fitness = 0.0;
};

double clamp_gene(double v, const GeneBounds& b) {
    return std::min(b.hi, std::max(b.lo, v));
}

void check_bounds(const std::vector<GeneBounds>& bounds) {
    if (bounds.empty())
        throw std::invalid_argument("run_ga: bounds must be non-empty");
    for (const auto& b : bounds) {
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi))
            throw std::invalid_argument("run_ga: each bound needs lo < hi");
    }
}

} // namespace

void Genome::validate() const {
    if (genes.size() != bounds.size())
        throw std::invalid_argument("genome: genes/bounds size mismatch");
    for (std::size_t j = 0; j < genes.size(); ++j) {
        if (!(bounds[j].lo < bounds[j].hi))
            throw std::invalid_argument("genome: bounds must satisfy lo < hi");
        if (!std::isfinite(genes[j]) || genes[j] < bounds[j].lo ||
            genes[j] > bounds[j].hi)
            throw std::invalid_argument("genome: gene outside its bounds");
    }
}

void GaConfig::validate() const {
    if (population_size < 4)
        throw std::invalid_argument("ga config: population_size must be >= 4");
    if (max_generations == 0)
        throw std::invalid_argument("ga config: max_generations must be >= 1");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
        throw std::invalid_argument("ga config: crossover_rate must be in [0,1]");
    if (!(mutation_sigma >= 0.0) || !std::isfinite(mutation_sigma))
        throw std::invalid_argument("ga config: mutation_sigma must be >= 0");
    if (elitism_count >= population_size)
        throw std::invalid_argument(
            "ga config: elitism_count must be smaller than the population");
    if (stall_generations < 1)
        throw std::invalid_argument("ga config: stall_generations must be >= 1");
    if (!(stall_tolerance >= 0.0))
        throw std::invalid_argument("ga config: stall_tolerance must be >= 0");
}

GaResult run_ga(const FitnessFn& fitness,
                const std::vector<GeneBounds>& bounds, const GaConfig& config) {
    config.validate();
    check_bounds(bounds);
    if (!fitness) throw std::invalid_argument("run_ga: fitness is empty");

    const std::size_t pop_n = config.population_size;
    const std::size_t genes_n = bounds.size();
    const double mutation_prob = 1.0 / static_cast<double>(genes_n);

    // Initial population: uniform in the box, one stream per slot.
    std::vector<Scored> pop(pop_n);
    for (std::size_t i = 0; i < pop_n; ++i) {
        auto rng = stream(config.seed, 0, i);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        Genome g;
        g.bounds = bounds;
        g.genes.resize(genes_n);
        for (std::size_t j = 0; j < genes_n; ++j)
            g.genes[j] = bounds[j].lo + (bounds[j].hi - bounds[j].lo) * u01(rng);
        pop[i].genome = std::move(g);
    }
    // Evaluation is free of RNG access, so scheduling cannot affect results.
    for (auto& s : pop) s.fitness = fitness(s.genome);

    const auto by_fitness = [](const Scored& a, const Scored& b) {
        return a.fitness < b.fitness;
    };
    std::stable_sort(pop.begin(), pop.end(), by_fitness);

    GaResult result;
    result.history.push_back(pop.front().fitness);

    for (std::size_t gen = 1; gen <= config.max_generations; ++gen) {
        const std::size_t elite_n = config.elitism_count;
        std::vector<Scored> next;
        next.reserve(pop_n);
        for (std::size_t i = 0; i < elite_n; ++i) next.push_back(pop[i]);

        for (std::size_t slot = elite_n; slot < pop_n; ++slot) {
            auto rng = stream(config.seed, gen, slot);
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            std::uniform_int_distribution<std::size_t> pick(0, pop_n - 1);
            const auto tournament = [&]() -> const Scored& {
                const std::size_t a = pick(rng);
                const std::size_t b = pick(rng);
                return pop[a].fitness <= pop[b].fitness ? pop[a] : pop[b];
            };
            const Scored& pa = tournament();
            const Scored& pb = tournament();

            Genome child;
            child.bounds = bounds;
            child.genes.resize(genes_n);
            const bool blend = u01(rng) < config.crossover_rate;
            for (std::size_t j = 0; j < genes_n; ++j) {
                if (blend) {
                    const double lo =
                        std::min(pa.genome.genes[j], pb.genome.genes[j]);
                    const double hi =
                        std::max(pa.genome.genes[j], pb.genome.genes[j]);
                    const double d = hi - lo;
                    if (d > 0.0) {
                        std::uniform_real_distribution<double> blx(
                            lo - 0.5 * d, hi + 0.5 * d);
                        child.genes[j] = clamp_gene(blx(rng), bounds[j]);
                    } else {
                        child.genes[j] = lo;
                    }
                } else {
                    child.genes[j] = pa.genome.genes[j];
                }
            }
            std::normal_distribution<double> gauss(0.0, 1.0);
            for (std::size_t j = 0; j < genes_n; ++j) {
                if (u01(rng) < mutation_prob) {
                    const double range = bounds[j].hi - bounds[j].lo;
                    child.genes[j] = clamp_gene(
                        child.genes[j] +
                            config.mutation_sigma * range * gauss(rng),
                        bounds[j]);
                }
            }
            next.push_back({std::move(child), 0.0});
        }

        for (std::size_t i = elite_n; i < pop_n; ++i)
            next[i].fitness = fitness(next[i].genome);
        std::stable_sort(next.begin(), next.end(), by_fitness);
        pop = std::move(next);

        result.history.push_back(pop.front().fitness);
        result.generations_run = gen;

        if (result.history.size() > config.stall_generations) {
            const double before =
                result.history[result.history.size() - 1 -
                               config.stall_generations];
            const double now = result.history.back();
            if (before - now < config.stall_tolerance) break;
        }
    }

    result.best_genome = pop.front().genome;
    result.best_fitness = pop.front().fitness;
    return result;
}

} // namespace ifpc
