#pragma once

#include <stdexcept>
#include <string>

namespace spatialps {

// Malformed or inconsistent input data (bad CSV rows, impossible designs, ...).
// The CLI maps this to exit code 2.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown (singular systems, non-positive-definite information,
// optimizer stuck on a boundary, ...). The CLI maps this to exit code 3.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spatialps
