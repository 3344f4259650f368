#pragma once

#include <stdexcept>
#include <string>

namespace swsk {

// Input document (scenario, config, payload) failed validation. `path` names
// the offending location, e.g. "engine.weights.hr".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swsk
