#pragma once

#include <stdexcept>
#include <string>

namespace relocsplit {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RELOCSPLIT_DEFINE_ERROR(Name)        \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

RELOCSPLIT_DEFINE_ERROR(NonPositiveStepsize);
RELOCSPLIT_DEFINE_ERROR(SingularSystem);
RELOCSPLIT_DEFINE_ERROR(NotMonotone);
RELOCSPLIT_DEFINE_ERROR(DimensionMismatch);
RELOCSPLIT_DEFINE_ERROR(DomainError);
RELOCSPLIT_DEFINE_ERROR(UnsupportedSet);
RELOCSPLIT_DEFINE_ERROR(UnsupportedOperator);
RELOCSPLIT_DEFINE_ERROR(NotAFixedPoint);
RELOCSPLIT_DEFINE_ERROR(DivergenceDetected);
RELOCSPLIT_DEFINE_ERROR(NoConvergence);
RELOCSPLIT_DEFINE_ERROR(BadBlockCount);
RELOCSPLIT_DEFINE_ERROR(ChainMismatch);
RELOCSPLIT_DEFINE_ERROR(MissingBlocks);
RELOCSPLIT_DEFINE_ERROR(MissingDistances);
RELOCSPLIT_DEFINE_ERROR(NonSingletonFix);
RELOCSPLIT_DEFINE_ERROR(TooFewSamples);
RELOCSPLIT_DEFINE_ERROR(ConfigError);
RELOCSPLIT_DEFINE_ERROR(IoError);

#undef RELOCSPLIT_DEFINE_ERROR

}  // namespace relocsplit
