#pragma once

#include <stdexcept>
#include <string>

namespace lrd {

// Thrown for every rejected input across the library and the CLI.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lrd
