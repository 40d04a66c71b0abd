#pragma once

#include <stdexcept>
#include <string>

namespace topocover {

// Bad arguments: dimension mismatches, out-of-range parameters, malformed files.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A configured budget (simplex count, enumeration size) would be exceeded.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, int dimension = -1)
        : std::runtime_error(what), dimension_(dimension) {}

    // Simplex dimension that exceeded the budget, or -1 if not dimension-specific.
    int dimension() const noexcept { return dimension_; }

private:
    int dimension_;
};

// An object was used before it reached the required state.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Non-finite loss during training.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, int epoch, int replication)
        : std::runtime_error(what), epoch_(epoch), replication_(replication) {}

    int epoch() const noexcept { return epoch_; }
    int replication() const noexcept { return replication_; }

private:
    int epoch_;
    int replication_;
};

}  // namespace topocover
