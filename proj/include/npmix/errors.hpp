#pragma once

#include <stdexcept>
#include <string>

namespace npmix {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define NPMIX_DEFINE_ERROR(Name)                \
  struct Name : Error {                         \
    using Error::Error;                         \
  }

NPMIX_DEFINE_ERROR(InvalidArgument);
NPMIX_DEFINE_ERROR(InvalidDistribution);
NPMIX_DEFINE_ERROR(UndefinedPosterior);
NPMIX_DEFINE_ERROR(IndeterminateDominance);
NPMIX_DEFINE_ERROR(NoObservations);
NPMIX_DEFINE_ERROR(UnboundedProblem);
NPMIX_DEFINE_ERROR(EmptyResponsibility);
NPMIX_DEFINE_ERROR(ScaleOutOfRange);
NPMIX_DEFINE_ERROR(ZeroTruncationMass);
NPMIX_DEFINE_ERROR(NoInteriorRoot);
NPMIX_DEFINE_ERROR(QuadratureFailure);
NPMIX_DEFINE_ERROR(ParseError);

#undef NPMIX_DEFINE_ERROR

}  // namespace npmix
