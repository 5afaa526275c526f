#pragma once

#include <stdexcept>
#include <string>

namespace lumen {

/// A model file that cannot be parsed or is missing required fields.
class ModelFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A well-formed model file written with an unsupported format version.
class ModelVersionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace lumen
