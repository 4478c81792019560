#pragma once

#include <stdexcept>
#include <string>

namespace shor_ttn {

// Invalid arguments to arithmetic or instance construction.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Operation called on a network in the wrong lifecycle state
// (out-of-order absorption, MPS conversion before measurement, ...).
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

// LAPACK failures, zero tensors handed to a decomposition.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense expansion or memory estimate above the configured cap.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Forced measurement outcome with zero amplitude.
struct InvalidOutcome : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed axis labels or mismatched dimensions.
struct TensorError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace shor_ttn
