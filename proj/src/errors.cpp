#include "elflow/errors.hpp"

namespace elflow {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotCompatible: return "NotCompatible";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::PicardDiverged: return "PicardDiverged";
    case ErrorKind::CflViolated: return "CflViolated";
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::MismatchedSeries: return "MismatchedSeries";
    case ErrorKind::UnknownScenario: return "UnknownScenario";
    case ErrorKind::InvalidOverride: return "InvalidOverride";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace elflow
