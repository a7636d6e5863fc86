#pragma once

#include <stdexcept>
#include <string>

namespace fedcost {

// Invalid user input: malformed scenario file, broken config invariant,
// incompatible comparison inputs. Maps to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Broken invariant inside the simulation itself (bug signal, not user
// error). Maps to exit code 3 in the CLI.
class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fedcost
