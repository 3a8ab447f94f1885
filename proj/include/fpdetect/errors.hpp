#pragma once

#include <stdexcept>
#include <string>

namespace fpdetect {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct MissingColumnError : Error { using Error::Error; };
struct BadValueError : Error { using Error::Error; };
struct EmptySetError : Error { using Error::Error; };
struct SingleClassError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct LengthMismatchError : Error { using Error::Error; };
struct TooFewRowsError : Error { using Error::Error; };
struct NotSymmetricError : Error { using Error::Error; };
struct NoConvergenceError : Error { using Error::Error; };
struct SingularMatrixError : Error { using Error::Error; };
struct DegenerateDataError : Error { using Error::Error; };
struct NonBinaryLabelsError : Error { using Error::Error; };
struct DivergedError : Error { using Error::Error; };
struct AllFeaturesRemovedError : Error { using Error::Error; };
struct FractionTooSmallError : Error { using Error::Error; };

} // namespace fpdetect
