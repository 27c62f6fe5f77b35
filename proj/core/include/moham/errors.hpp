#pragma once

#include <stdexcept>
#include <string>

namespace moham
{

    // Input document does not follow the expected schema.
    class SchemaError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Input is well formed but semantically invalid (cycles, dangling references, bounds).
    class ValidationError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Search could not produce a usable result (empty catalog, no feasible sample, ...).
    class SearchError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // An output file or directory could not be written.
    class IoError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

} // namespace moham
