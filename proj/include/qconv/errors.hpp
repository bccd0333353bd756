#pragma once

#include <stdexcept>
#include <string>

namespace qconv {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define QCONV_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                               \
    public:                                                                    \
        using Error::Error;                                                    \
    }

QCONV_DEFINE_ERROR(InvalidDistribution);
QCONV_DEFINE_ERROR(NonStochasticRow);
QCONV_DEFINE_ERROR(BadGamma);
QCONV_DEFINE_ERROR(IndexOutOfRange);
QCONV_DEFINE_ERROR(DimensionMismatch);
QCONV_DEFINE_ERROR(NonConvergence);
QCONV_DEFINE_ERROR(NonFiniteValue);
QCONV_DEFINE_ERROR(BadSchedule);
QCONV_DEFINE_ERROR(NonVanishingPerturbation);
QCONV_DEFINE_ERROR(OutOfDomain);
QCONV_DEFINE_ERROR(UnsupportedTransition);
QCONV_DEFINE_ERROR(NonSmoothAtPoint);
QCONV_DEFINE_ERROR(ConfigError);
QCONV_DEFINE_ERROR(IoError);
QCONV_DEFINE_ERROR(SchemaMismatch);

#undef QCONV_DEFINE_ERROR

} // namespace qconv
