#include "moham/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace moham
{

    std::vector<std::vector<std::size_t>> FastNonDominatedSort(std::span<const Objectives> pop)
    {
        const std::size_t n = pop.size();
        std::vector<std::vector<std::size_t>> dominated(n);
        std::vector<std::size_t> domination_count(n, 0);
        std::vector<std::vector<std::size_t>> fronts;

        std::vector<std::size_t> current;
        for (std::size_t p = 0; p < n; p++)
        {
            for (std::size_t q = p + 1; q < n; q++)
            {
                if (Dominates(pop[p], pop[q]))
                {
                    dominated[p].push_back(q);
                    domination_count[q]++;
                }
                else if (Dominates(pop[q], pop[p]))
                {
                    dominated[q].push_back(p);
                    domination_count[p]++;
                }
            }
        }
        for (std::size_t p = 0; p < n; p++)
            if (domination_count[p] == 0) current.push_back(p);

        while (!current.empty())
        {
            std::vector<std::size_t> next;
            for (std::size_t p : current)
                for (std::size_t q : dominated[p])
                    if (--domination_count[q] == 0) next.push_back(q);
            std::sort(next.begin(), next.end());
            fronts.push_back(std::move(current));
            current = std::move(next);
        }
        return fronts;
    }

    std::vector<double> CrowdingDistance(std::span<const Objectives> front)
    {
        constexpr double kInf = std::numeric_limits<double>::infinity();
        const std::size_t n = front.size();
        std::vector<double> distance(n, 0.0);
        if (n <= 2)
        {
            std::fill(distance.begin(), distance.end(), kInf);
            return distance;
        }

        std::vector<std::size_t> order(n);
        for (std::size_t m = 0; m < 3; m++)
        {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return front[a][m] < front[b][m]; });
            distance[order.front()] = kInf;
            distance[order.back()] = kInf;
            const double range = front[order.back()][m] - front[order.front()][m];
            if (!(range > 0.0) || !std::isfinite(range)) continue;
            for (std::size_t i = 1; i + 1 < n; i++)
                distance[order[i]] += (front[order[i + 1]][m] - front[order[i - 1]][m]) / range;
        }
        return distance;
    }

    Ranking RankPopulation(std::span<const Objectives> pop)
    {
        Ranking r;
        r.fronts = FastNonDominatedSort(pop);
        r.rank.assign(pop.size(), 0);
        r.crowding.assign(pop.size(), 0.0);
        std::vector<Objectives> members;
        for (std::size_t f = 0; f < r.fronts.size(); f++)
        {
            members.clear();
            for (std::size_t i : r.fronts[f])
            {
                r.rank[i] = f;
                members.push_back(pop[i]);
            }
            auto cd = CrowdingDistance(members);
            for (std::size_t k = 0; k < r.fronts[f].size(); k++) r.crowding[r.fronts[f][k]] = cd[k];
        }
        return r;
    }

    std::size_t TournamentWinner(const Ranking& ranking, std::size_t a, std::size_t b)
    {
        if (ranking.rank[a] != ranking.rank[b]) return ranking.rank[a] < ranking.rank[b] ? a : b;
        if (ranking.crowding[a] != ranking.crowding[b]) return ranking.crowding[a] > ranking.crowding[b] ? a : b;
        return std::min(a, b);
    }

    std::size_t TournamentSelect(const Ranking& ranking, std::mt19937_64& rng)
    {
        std::uniform_int_distribution<std::size_t> pick(0, ranking.rank.size() - 1);
        const std::size_t a = pick(rng);
        const std::size_t b = pick(rng);
        return TournamentWinner(ranking, a, b);
    }

    std::vector<std::size_t> Survival(std::span<const Objectives> merged, std::size_t target)
    {
        const Ranking r = RankPopulation(merged);
        std::vector<std::size_t> survivors;
        for (const auto& front : r.fronts)
        {
            if (survivors.size() >= target) break;
            if (survivors.size() + front.size() <= target)
            {
                survivors.insert(survivors.end(), front.begin(), front.end());
                continue;
            }
            std::vector<std::size_t> last = front;
            std::stable_sort(last.begin(), last.end(), [&](std::size_t a, std::size_t b) {
                if (r.crowding[a] != r.crowding[b]) return r.crowding[a] > r.crowding[b];
                return a < b;
            });
            last.resize(target - survivors.size());
            survivors.insert(survivors.end(), last.begin(), last.end());
        }
        return survivors;
    }

    bool Converged(std::span<const double> history, const ConvergenceConfig& cfg)
    {
        if (history.size() >= cfg.max_generations) return true;
        if (!cfg.use_density || cfg.window == 0 || history.size() < cfg.window) return false;
        return std::all_of(history.end() - static_cast<std::ptrdiff_t>(cfg.window), history.end(),
                           [&](double f) { return f >= cfg.density_threshold; });
    }

} // namespace moham
