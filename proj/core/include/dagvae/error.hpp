#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dagvae {

enum class ErrorKind {
  ShapeMismatch,
  NonFiniteValue,
  GraphConsumed,
  DetachedLoss,
  MissingGrad,
  CycleDetected,
  TooLarge,
  BudgetExceeded,
  ParseError,
  UnknownOp,
  DegenerateSpread,
  IllConditioned,
  OracleMiss,
  MissingCheckpoint,
  ConfigError,
  EmptyDataset,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the
/// CLI's exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dagvae
