#ifndef TSP_ERROR_HPP
#define TSP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tsp {

// Error taxonomy mapped to CLI exit codes:
//   ConfigError            -> 1 (bad config, schema violation, bad arguments)
//   IoError / FormatError  -> 2 (filesystem, malformed or truncated artifact)
//   NumericError           -> 3 (training divergence, degenerate numerics)
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(category + ": " + message),
        category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io", m) {}
};

// Malformed binary artifact; message names the byte offset of the defect.
struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error("format", m) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error("numeric", m) {}
};

struct StateError : Error {
  explicit StateError(const std::string& m) : Error("state", m) {}
};

}  // namespace tsp

#endif  // TSP_ERROR_HPP
