#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plcsim {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Operands defined on different frequency grids or with mismatched lengths.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Unknown cell id, node id or cable key.
struct LookupError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Zero impedance where a finite admittance is required.
struct SingularLoadError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Sector lists that do not partition the cell set.
struct PartitionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable simulation configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Linear solve failed at one point of the frequency grid.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t frequency_index)
      : std::runtime_error(what + " (frequency index " + std::to_string(frequency_index) + ")"),
        frequency_index_(frequency_index) {}

  std::size_t frequency_index() const noexcept { return frequency_index_; }

 private:
  std::size_t frequency_index_;
};

}  // namespace plcsim
