#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sbm {

// Precondition violated by the caller (bad dimension, negative radius, ...).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed input: manifests, checkpoints, CSV files, grids.
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to converge. `history` keeps the trail
// (bracket endpoints, refinement values) so the caller can see why.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, std::vector<double> history = {})
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

// Work or population cap exceeded.
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw domain_error(msg);
}

}  // namespace sbm
