#pragma once

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "moham/workload.hpp"

namespace moham
{

    using BigInt = boost::multiprecision::cpp_int;

    struct SearchSpaceParams
    {
        std::uint64_t free_params = 1;       // np
        std::uint64_t values_per_param = 1;  // v
        std::uint64_t num_instances = 1;     // |SSAI|
        std::uint64_t loop_depth = 6;        // nl
        LayerShape shape;
        std::uint64_t num_layers = 1;        // |L|
        std::uint64_t num_models = 1;        // nd
        std::uint64_t layers_per_model = 1;  // l
    };

    struct SearchSpaceReport
    {
        BigInt hardware;      // v^np * |SSAI|
        BigInt mapping;       // nl! * 2^nl * (C*K*Y*X*R*S) * |L|
        BigInt layer_to_sa;   // |L| * |SSAI|
        BigInt sa_to_tile;    // |SSAI|!
        BigInt schedule;      // (nd! * l) * l^nd
        BigInt total;
    };

    // Exact sizes of the five search sub-spaces and their product. Throws
    // ValidationError if any count is zero.
    SearchSpaceReport ComputeSearchSpace(const SearchSpaceParams& params);

    nlohmann::json ToJson(const SearchSpaceReport& report);

} // namespace moham
