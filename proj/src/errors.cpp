#include "syrof/errors.hpp"

namespace syrof {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::duplicate_topic: return "DuplicateTopic";
    case Errc::invalid_size: return "InvalidSize";
    case Errc::unknown_topic: return "UnknownTopic";
    case Errc::invalid_handle: return "InvalidHandle";
    case Errc::empty_outbox: return "EmptyOutbox";
    case Errc::non_finite: return "NonFinite";
    case Errc::degenerate_geometry: return "DegenerateGeometry";
    case Errc::inconsistent_ranging: return "Inconsistent";
    case Errc::covariance_not_psd: return "CovarianceNotPSD";
    case Errc::singular_innovation: return "SingularInnovation";
    case Errc::payload_size: return "PayloadSize";
    case Errc::not_in_progress: return "NotInProgress";
    case Errc::invalid_id: return "InvalidId";
    case Errc::malformed_frame: return "MalformedFrame";
    case Errc::already_registered: return "AlreadyRegistered";
    case Errc::payload_too_large: return "PayloadTooLarge";
    case Errc::hook_failure: return "HookFailure";
    case Errc::empty_set: return "EmptySet";
    case Errc::empty_map: return "EmptyMap";
    case Errc::size_mismatch: return "SizeMismatch";
    case Errc::config_invalid: return "ConfigInvalid";
    case Errc::budget_exceeded: return "BudgetExceeded";
  }
  return "UnknownError";
}

}  // namespace syrof
