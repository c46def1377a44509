#pragma once

#include <stdexcept>
#include <string>

namespace spectreg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroSignal : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct BadDimensions : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct InstabilityDetected : Error { using Error::Error; };
struct RejectionBudgetExceeded : Error { using Error::Error; };
struct NoFeasiblePair : Error { using Error::Error; };
struct SvdFailure : Error { using Error::Error; };
struct BothZero : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct SegmentTooLong : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct NonFiniteObjective : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct EmptyAfterFiltering : Error { using Error::Error; };

}  // namespace spectreg
