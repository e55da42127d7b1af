#pragma once

#include <stdexcept>

namespace shoprl {

/// Invalid sizes, empty inputs, malformed configuration values.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An action that is not available in the current state, or an option value
/// the product does not offer.
struct InvalidActionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operation not permitted in the current state (e.g. stepping a finished
/// episode).
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PruningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or schema-violating persisted data.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace shoprl
