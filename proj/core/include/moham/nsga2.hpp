#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "moham/layermapper.hpp"

namespace moham
{

    // Fronts in ascending rank; each front lists member indices ascending.
    std::vector<std::vector<std::size_t>> FastNonDominatedSort(std::span<const Objectives> pop);

    // Crowding distance of each member of one front, in the order given.
    // Members at either end of an objective get +inf; an objective whose
    // range is empty or unbounded adds nothing to interior members.
    std::vector<double> CrowdingDistance(std::span<const Objectives> front);

    struct Ranking
    {
        std::vector<std::vector<std::size_t>> fronts;
        std::vector<std::size_t> rank;
        std::vector<double> crowding;
    };

    Ranking RankPopulation(std::span<const Objectives> pop);

    // Winner of one contest: lower rank, then larger crowding, then lower index.
    std::size_t TournamentWinner(const Ranking& ranking, std::size_t a, std::size_t b);

    // Binary tournament with replacement.
    std::size_t TournamentSelect(const Ranking& ranking, std::mt19937_64& rng);

    // Indices kept from the merged population, in order of selection: whole
    // fronts by rank, the last admitted front by descending crowding, ties by index.
    std::vector<std::size_t> Survival(std::span<const Objectives> merged, std::size_t target);

    struct ConvergenceConfig
    {
        bool use_density = true;
        double density_threshold = 0.9;
        std::size_t window = 5;
        std::size_t max_generations = 300;
    };

    // `history` holds the front-0 fraction of each completed generation.
    bool Converged(std::span<const double> history, const ConvergenceConfig& cfg);

} // namespace moham
