#pragma once

#include <stdexcept>
#include <string>

namespace hjb {

/// Base of every error raised by the library. Each subclass corresponds to a
/// named failure of one operation; callers that only want a message can catch
/// this type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HJB_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                  \
    public:                                                      \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

// grid / operator
HJB_DEFINE_ERROR(InvalidDomain);
HJB_DEFINE_ERROR(GridMismatch);
HJB_DEFINE_ERROR(MonotonicityViolation);
HJB_DEFINE_ERROR(InvalidCoefficients);

// solver
HJB_DEFINE_ERROR(ImproperShift);
HJB_DEFINE_ERROR(LinearSolveFailure);
HJB_DEFINE_ERROR(NotOrdered);
HJB_DEFINE_ERROR(NotSubSuper);

// eigen
HJB_DEFINE_ERROR(NoConvergence);
HJB_DEFINE_ERROR(SignLoss);

// tstar
HJB_DEFINE_ERROR(DegenerateRHS);
HJB_DEFINE_ERROR(Inconclusive);

// nonlin
HJB_DEFINE_ERROR(InvalidParams);
HJB_DEFINE_ERROR(BoundViolated);

// branch
HJB_DEFINE_ERROR(NoSeed);
HJB_DEFINE_ERROR(Stalled);

// oracle
HJB_DEFINE_ERROR(UnsupportedOperator);
HJB_DEFINE_ERROR(DegenerateDifferences);
HJB_DEFINE_ERROR(NonMonotoneScan);

// cli
HJB_DEFINE_ERROR(ConfigError);

#undef HJB_DEFINE_ERROR

}  // namespace hjb
