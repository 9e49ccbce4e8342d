#pragma once

#include <stdexcept>
#include <string>

namespace covert {

/// Input outside an operation's mathematical domain.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Iterative method ran out of budget; carries the best estimate reached.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

  private:
    double best_estimate_;
};

}  // namespace covert
