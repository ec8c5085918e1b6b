#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ct {

enum class Errc {
  EmptyCorpus,
  NoBins,
  AlreadyNormalized,
  IoError,
  FormatError,
  UnknownFeed,
  NotEnoughFeeds,
  SeriesTooShort,
  TooFewSamples,
  NumericalFailure,
  SingularRhs,
  ShapeMismatch,
  NonLinearKernel,
  TooShortForFolds,
  DegenerateProjection,
  BadConfig,
  InvalidArgument,
};

std::string_view errc_name(Errc code);

/// Library error carrying a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), detail_(message) {}

  Errc code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace ct
