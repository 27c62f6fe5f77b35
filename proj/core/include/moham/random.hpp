#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace moham
{

    // Independent generator for a named purpose, derived from the run seed.
    inline std::mt19937_64 Substream(std::uint64_t seed, std::string_view name)
    {
        std::uint64_t h = 14695981039346656037ull;  // FNV-1a
        for (unsigned char ch : name)
        {
            h ^= ch;
            h *= 1099511628211ull;
        }
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
        return std::mt19937_64(seq);
    }

    inline std::size_t UniformIndex(std::mt19937_64& rng, std::size_t n)
    {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }

    inline double UniformUnit(std::mt19937_64& rng)
    {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }

} // namespace moham
