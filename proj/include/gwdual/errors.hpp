#pragma once

#include <stdexcept>
#include <string>

namespace gwdual {

/// Base class for all domain errors. The CLI maps these to exit code 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidOffspring : Error { using Error::Error; };
struct InvalidLaw : Error { using Error::Error; };
struct WindowError : Error { using Error::Error; };
struct RankOverflow : Error { using Error::Error; };
struct OffspringCapExceeded : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct NotRankIndependent : Error { using Error::Error; };
struct DegenerateLaw : Error { using Error::Error; };
struct WindowTooSmall : Error { using Error::Error; };
struct EnumerationOverflow : Error { using Error::Error; };
struct InvalidRates : Error { using Error::Error; };
struct SimOverflow : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace gwdual
