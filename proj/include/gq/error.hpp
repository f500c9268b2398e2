// Error hierarchy shared by every module. Each error carries a stable kind
// string that the CLI prints as a machine-parsable `error: <kind>: <message>`
// line.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gq {

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& m) : Error("DimensionMismatch", m) {}
};

struct OrderExceedsBound : Error {
  explicit OrderExceedsBound(const std::string& m) : Error("OrderExceedsBound", m) {}
};

struct ExactLimitExceeded : Error {
  explicit ExactLimitExceeded(const std::string& m) : Error("ExactLimitExceeded", m) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& m) : Error("NumericalError", m) {}
};

struct InvalidEdge : Error {
  explicit InvalidEdge(const std::string& m) : Error("InvalidEdge", m) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("ParseError", m) {}
  ParseError(long line, const std::string& m)
      : Error("ParseError", "line " + std::to_string(line) + ": " + m) {}
};

struct DiscontinuousDistortion : Error {
  explicit DiscontinuousDistortion(const std::string& m) : Error("DiscontinuousDistortion", m) {}
};

struct InsufficientData : Error {
  explicit InsufficientData(const std::string& m) : Error("InsufficientData", m) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("ConfigError", m) {}
};

}  // namespace gq
