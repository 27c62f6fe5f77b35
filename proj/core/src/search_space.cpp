#include "moham/search_space.hpp"

#include "moham/errors.hpp"

namespace moham
{

    namespace
    {
        BigInt Factorial(std::uint64_t n)
        {
            BigInt f = 1;
            for (std::uint64_t i = 2; i <= n; i++)
                f *= i;
            return f;
        }

        BigInt Power(std::uint64_t base, std::uint64_t exp)
        {
            return boost::multiprecision::pow(BigInt(base), static_cast<unsigned>(exp));
        }
    }

    SearchSpaceReport ComputeSearchSpace(const SearchSpaceParams& p)
    {
        if (p.free_params == 0 || p.values_per_param == 0 || p.num_instances == 0 || p.loop_depth == 0 ||
            p.num_layers == 0 || p.num_models == 0 || p.layers_per_model == 0)
            throw ValidationError("search space parameters must all be >= 1");
        p.shape.Validate();

        SearchSpaceReport r;
        r.hardware = Power(p.values_per_param, p.free_params) * p.num_instances;

        BigInt tiling = 1;
        for (auto extent : p.shape.Dims())
            tiling *= extent;
        r.mapping = Factorial(p.loop_depth) * Power(2, p.loop_depth) * tiling * p.num_layers;

        r.layer_to_sa = BigInt(p.num_layers) * p.num_instances;
        r.sa_to_tile = Factorial(p.num_instances);
        r.schedule = Factorial(p.num_models) * p.layers_per_model * Power(p.layers_per_model, p.num_models);
        r.total = r.hardware * r.mapping * r.layer_to_sa * r.sa_to_tile * r.schedule;
        return r;
    }

    nlohmann::json ToJson(const SearchSpaceReport& r)
    {
        // Values are emitted as decimal strings; they routinely exceed 64 bits.
        return {
            {"hardware", r.hardware.str()},
            {"mapping", r.mapping.str()},
            {"layer_to_sa", r.layer_to_sa.str()},
            {"sa_to_tile", r.sa_to_tile.str()},
            {"schedule", r.schedule.str()},
            {"total", r.total.str()},
        };
    }

} // namespace moham
