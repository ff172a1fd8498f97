#pragma once

#include <stdexcept>
#include <string>

namespace snnsafe {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SNNSAFE_DEFINE_ERROR(Name)                     \
    class Name : public Error {                        \
    public:                                            \
        explicit Name(const std::string& what)         \
            : Error(std::string(#Name ": ") + what) {} \
    }

// Input files.
SNNSAFE_DEFINE_ERROR(ParseError);
SNNSAFE_DEFINE_ERROR(ShapeError);
SNNSAFE_DEFINE_ERROR(UnsupportedActivation);
SNNSAFE_DEFINE_ERROR(CountMismatch);
SNNSAFE_DEFINE_ERROR(DegenerateInterval);
SNNSAFE_DEFINE_ERROR(IoError);

// Simulation and conversion.
SNNSAFE_DEFINE_ERROR(DimensionMismatch);
SNNSAFE_DEFINE_ERROR(EmptyDataset);
SNNSAFE_DEFINE_ERROR(InvalidTheta);
SNNSAFE_DEFINE_ERROR(InvalidLeak);
SNNSAFE_DEFINE_ERROR(StepExceedsPeriod);

// MILP and verification.
SNNSAFE_DEFINE_ERROR(InvalidModel);
SNNSAFE_DEFINE_ERROR(UnknownVariable);
SNNSAFE_DEFINE_ERROR(IndexOutOfRange);
SNNSAFE_DEFINE_ERROR(NotFeasible);
SNNSAFE_DEFINE_ERROR(NotUnsafe);
SNNSAFE_DEFINE_ERROR(InvalidConfig);

#undef SNNSAFE_DEFINE_ERROR

} // namespace snnsafe
