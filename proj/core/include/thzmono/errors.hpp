#pragma once

#include <stdexcept>
#include <string>

namespace thzmono {

/// Malformed or missing input artifact (bad file, bad schema, bad argument).
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation could not be carried out on otherwise well-formed input
/// (rank-deficient fit, no usable reference trajectory, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace thzmono
