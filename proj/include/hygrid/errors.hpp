#pragma once

#include <stdexcept>
#include <string>

namespace hygrid {

/// Base class for all library errors. `category()` is stable and machine-parsable;
/// the CLI maps categories to distinct exit codes.
class Error : public std::runtime_error {
  public:
    explicit Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

  private:
    std::string category_;
};

/// Malformed network description: bad node ids, dimension mismatches, unknown branches.
class StructuralError : public Error {
  public:
    explicit StructuralError(const std::string& message) : Error("structural", message) {}
};

/// A state vector does not match the grid it is evaluated against.
class StateError : public Error {
  public:
    explicit StateError(const std::string& message) : Error("state", message) {}
};

/// An operation was called with arguments violating its contract
/// (e.g. a control variable inconsistent with the node role).
class ContractError : public Error {
  public:
    explicit ContractError(const std::string& message) : Error("contract", message) {}
};

/// Newton iteration did not reach the tolerance within the iteration budget.
class NonConvergence : public Error {
  public:
    NonConvergence(int iterations, double final_norm, const std::string& context = "")
        : Error("non-convergence",
                "power flow did not converge after " + std::to_string(iterations) +
                    " iterations (residual inf-norm " + std::to_string(final_norm) + ")" +
                    (context.empty() ? "" : "; " + context)),
          iterations(iterations),
          final_norm(final_norm) {}

    int iterations;
    double final_norm;
};

/// The power-flow Jacobian could not be factorized at some iteration.
class SingularJacobian : public Error {
  public:
    explicit SingularJacobian(int iteration, double rcond_estimate)
        : Error("singular-jacobian", "power-flow Jacobian is numerically singular at iteration " +
                                         std::to_string(iteration) + " (rcond estimate " +
                                         std::to_string(rcond_estimate) + ")"),
          iteration(iteration),
          rcond_estimate(rcond_estimate) {}

    int iteration;
    double rcond_estimate;
};

/// The sensitivity matrix A is numerically singular, i.e. the operating point is
/// degenerate and the uniqueness hypothesis fails.
class SingularSystem : public Error {
  public:
    explicit SingularSystem(double condition_estimate)
        : Error("singular-system",
                "sensitivity system matrix is numerically singular (reciprocal condition "
                "estimate " +
                    std::to_string(condition_estimate) + ")"),
          condition_estimate(condition_estimate) {}

    double condition_estimate;
};

/// Polar conversion hit a node with zero voltage magnitude.
class ZeroVoltageMagnitude : public Error {
  public:
    explicit ZeroVoltageMagnitude(const std::string& node)
        : Error("zero-voltage", "voltage magnitude is zero at node " + node +
                                    "; polar sensitivities are undefined there"),
          node(node) {}

    std::string node;
};

/// Grid file could not be read or parsed.
class FileError : public Error {
  public:
    explicit FileError(const std::string& message) : Error("file", message) {}
};

}  // namespace hygrid
