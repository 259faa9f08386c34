#pragma once

#include <stdexcept>
#include <string>

namespace quadsim {

/// Input rejected by a precondition check (bad parameter, malformed file,
/// out-of-range setting). The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Simulation state left the finite domain mid-run.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t record_index)
        : std::runtime_error(what), record_index_(record_index) {}

    std::size_t record_index() const noexcept { return record_index_; }

private:
    std::size_t record_index_;
};

}  // namespace quadsim
