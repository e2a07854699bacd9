#pragma once

#include <stdexcept>
#include <string>

namespace synet {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct BoundsError : std::runtime_error {
    explicit BoundsError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// No feasible trajectory start or corridor in the scene.
struct NoTraversableCorridor : std::runtime_error {
    explicit NoTraversableCorridor(const std::string& what) : std::runtime_error(what) {}
};

// Proposal filtering exhausted its retry budget.
struct ProposalRejected : std::runtime_error {
    ProposalRejected(const std::string& what, int retries_)
        : std::runtime_error(what), retries(retries_) {}
    int retries;
};

struct EmptyFeatureSet : std::runtime_error {
    explicit EmptyFeatureSet(const std::string& what) : std::runtime_error(what) {}
};

struct DegeneratePositiveSet : std::runtime_error {
    explicit DegeneratePositiveSet(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyNegativeSet : std::runtime_error {
    explicit EmptyNegativeSet(const std::string& what) : std::runtime_error(what) {}
};

struct SingleClassGroundTruth : std::runtime_error {
    explicit SingleClassGroundTruth(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyNegativeRegion : std::runtime_error {
    explicit EmptyNegativeRegion(const std::string& what) : std::runtime_error(what) {}
};

// CSV schema does not match the requested plot kind.
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a loss term evaluates non-finite; names the offending term.
struct GradientError : std::runtime_error {
    GradientError(const std::string& what, std::string term_)
        : std::runtime_error(what), term(std::move(term_)) {}
    std::string term;
};

}  // namespace synet
