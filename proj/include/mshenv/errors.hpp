#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mshenv {

// Base of every error raised by the library. `stage()` names the pipeline
// step that failed so the harness can map it onto an exit code.
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class StencilUnavailable : public Error {
public:
    explicit StencilUnavailable(const std::string& what) : Error("stencil", what) {}
};

class HypothesisViolation : public Error {
public:
    explicit HypothesisViolation(const std::string& what) : Error("hypothesis", what) {}
};

class ChainOverflow : public Error {
public:
    explicit ChainOverflow(const std::string& what) : Error("cutoff-chain", what) {}
};

// Raised when the constant search of a barrier builder runs past its cap.
class SearchExhausted : public Error {
public:
    SearchExhausted(const std::string& stage, const std::string& what, double worst_value,
                    std::size_t worst_node)
        : Error(stage, what), worst_value_(worst_value), worst_node_(worst_node) {}

    double worst_value() const noexcept { return worst_value_; }
    std::size_t worst_node() const noexcept { return worst_node_; }

private:
    double worst_value_;
    std::size_t worst_node_;
};

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, std::vector<double> history)
        : Error("solver", what), history_(std::move(history)) {}

    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

class SolverInconsistency : public Error {
public:
    explicit SolverInconsistency(const std::string& what) : Error("stabilization", what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace mshenv
