#pragma once

#include <stdexcept>

namespace dispbayes {

// Common base so callers can catch all library errors at once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridError : Error { using Error::Error; };
struct RangeViolation : Error { using Error::Error; };
struct SlopeViolation : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DegenerateVariance : Error { using Error::Error; };
struct BadEps : Error { using Error::Error; };
struct NetTooLarge : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct NonFiniteLikelihood : Error { using Error::Error; };
struct EmptyChain : Error { using Error::Error; };
struct EmptyRestriction : Error { using Error::Error; };
struct DegenerateDesign : Error { using Error::Error; };
struct SpecSyntax : Error { using Error::Error; };

}  // namespace dispbayes
