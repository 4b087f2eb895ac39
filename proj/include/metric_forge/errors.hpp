#pragma once

#include <stdexcept>
#include <string>

namespace metric_forge {

// Base of every error the library throws. `kind()` is a stable machine-readable
// tag used by the CLI when it serializes failures.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define METRIC_FORGE_DEFINE_ERROR(Name, tag)                               \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& message) : Error(tag, message) {}     \
  };

METRIC_FORGE_DEFINE_ERROR(DimensionError, "dimension")
METRIC_FORGE_DEFINE_ERROR(InsufficientDataError, "insufficient_data")
METRIC_FORGE_DEFINE_ERROR(PreconditionError, "precondition")
METRIC_FORGE_DEFINE_ERROR(EvaluationError, "evaluation")
METRIC_FORGE_DEFINE_ERROR(UnsupportedOperationError, "unsupported_operation")
METRIC_FORGE_DEFINE_ERROR(ResourceError, "resource")
METRIC_FORGE_DEFINE_ERROR(CertificateError, "certificate")
METRIC_FORGE_DEFINE_ERROR(DomainError, "domain")
METRIC_FORGE_DEFINE_ERROR(ValidationError, "validation")
METRIC_FORGE_DEFINE_ERROR(IoError, "io")

#undef METRIC_FORGE_DEFINE_ERROR

}  // namespace metric_forge
