#ifndef TRISTEP_ERRORS_HPP
#define TRISTEP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tristep {

// Bad run/machine parameters: exit code 2 at the CLI.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed catalog/config files: exit code 3 at the CLI.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tristep

#endif
