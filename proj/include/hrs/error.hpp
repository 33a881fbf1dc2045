#pragma once

#include <stdexcept>
#include <string>

namespace hrs {

// Base of every error raised by the library. Subclasses name the contract
// that was violated so callers can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HRS_DEFINE_ERROR(Name)            \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

HRS_DEFINE_ERROR(DomainError);
HRS_DEFINE_ERROR(SignatureError);
HRS_DEFINE_ERROR(RandersBoundError);
HRS_DEFINE_ERROR(ConeDomainError);
HRS_DEFINE_ERROR(SingularityError);
HRS_DEFINE_ERROR(SamplingError);
HRS_DEFINE_ERROR(FrameError);
HRS_DEFINE_ERROR(ScheduleDomainError);
HRS_DEFINE_ERROR(CapabilityError);
HRS_DEFINE_ERROR(KinematicDomainError);
HRS_DEFINE_ERROR(DataCorruptionError);
HRS_DEFINE_ERROR(ShapeError);
HRS_DEFINE_ERROR(ProfileError);
HRS_DEFINE_ERROR(GeometryError);
HRS_DEFINE_ERROR(SetupError);
HRS_DEFINE_ERROR(CoverageError);
HRS_DEFINE_ERROR(ConfigError);

#undef HRS_DEFINE_ERROR

}  // namespace hrs
