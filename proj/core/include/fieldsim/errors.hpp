#pragma once

#include <stdexcept>
#include <string>

namespace fieldsim {

// Base class for every error raised by the library. Subclasses map onto the
// failure modes callers are expected to branch on.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FIELDSIM_DEFINE_ERROR(Name)   \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

// sim
FIELDSIM_DEFINE_ERROR(SchedulingInPast);
// world
FIELDSIM_DEFINE_ERROR(LayoutInfeasible);
// radio
FIELDSIM_DEFINE_ERROR(MissingAnchor);
// link
FIELDSIM_DEFINE_ERROR(PayloadTooLarge);
FIELDSIM_DEFINE_ERROR(DegenerateFit);
// experiments
FIELDSIM_DEFINE_ERROR(UnknownSeries);
FIELDSIM_DEFINE_ERROR(IoFailure);
FIELDSIM_DEFINE_ERROR(EmptyInput);
// logsync
FIELDSIM_DEFINE_ERROR(NoFixAvailable);
// groundstation
FIELDSIM_DEFINE_ERROR(NoActiveRun);
FIELDSIM_DEFINE_ERROR(NoTargetsResolved);
FIELDSIM_DEFINE_ERROR(VehicleUnreachable);
FIELDSIM_DEFINE_ERROR(UnknownRun);
FIELDSIM_DEFINE_ERROR(DuplicateVehicleId);

#undef FIELDSIM_DEFINE_ERROR

// Invalid configuration. `field` is a JSON-pointer-like path to the offending
// entry ("drones[0].mission.speed"); empty when the problem is not tied to a
// single field (e.g. a JSON syntax error, where the message carries line/col).
class ConfigInvalid : public Error {
 public:
  ConfigInvalid(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A wire message failed validation; `field` names the offending member.
class MalformedMessage : public Error {
 public:
  MalformedMessage(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace fieldsim
