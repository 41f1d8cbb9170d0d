#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace ifpc {

/// Inclusive search interval for one gene.
struct GeneBounds {
    double lo = 0.0;
    double hi = 1.0;
};

/// Candidate solution: a real vector together with the box it lives in.
struct Genome {
    std::vector<double> genes;
    std::vector<GeneBounds> bounds;  ///< one interval per gene, lo < hi

    /// Throws std::invalid_argument on size mismatch, inverted bounds,
    /// or genes outside their intervals.
    void validate() const;
};

/// Knobs for the real-coded genetic search. The defaults are standard
/// choices for low-dimensional continuous problems.
struct GaConfig {
    std::size_t population_size = 40;
    std::size_t max_generations = 100;
    double crossover_rate = 0.9;      ///< probability a child is blended
    double mutation_sigma = 0.1;      ///< stddev as a fraction of gene range
    std::size_t elitism_count = 1;    ///< top individuals copied verbatim
    double stall_tolerance = 1e-6;    ///< minimum improvement to keep going
    std::size_t stall_generations = 25;  ///< window for the improvement test
    std::uint64_t seed = 1;

    void validate() const;
};

/// Search outcome: the champion, its fitness, and the per-generation
/// best-fitness trace (entry 0 is the initial population; the sequence is
/// non-increasing thanks to elitism).
struct GaResult {
    Genome best_genome;
    double best_fitness = 0.0;
    std::vector<double> history;
    std::size_t generations_run = 0;
};

using FitnessFn = std::function<double(const Genome&)>;

/// Minimize `fitness` over the box described by `bounds`.
///
/// Tournament selection (size 2), blend crossover (alpha = 0.5), per-gene
/// Gaussian mutation (probability 1/num_genes, sigma as a fraction of the
/// gene range), elitism. Every random draw for generation g, offspring
/// slot i comes from a private RNG stream derived only from
/// (seed, g, i), so the result is bit-identical for a fixed seed no
/// matter how fitness evaluations are scheduled. Stops early when the
/// best fitness improves by less than stall_tolerance over
/// stall_generations consecutive generations.
///
/// The fitness function must be total: price failed evaluations into a
/// large finite penalty instead of throwing.
GaResult run_ga(const FitnessFn& fitness,
                const std::vector<GeneBounds>& bounds, const GaConfig& config);

} // namespace ifpc
