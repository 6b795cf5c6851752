#pragma once

#include <stdexcept>
#include <string>

namespace syrof {

/// Every recoverable failure in the library throws Error with one of these codes.
enum class Errc {
  // pubsub
  duplicate_topic,
  invalid_size,
  unknown_topic,
  invalid_handle,
  empty_outbox,
  // sensors
  non_finite,
  degenerate_geometry,
  inconsistent_ranging,
  // ekf
  covariance_not_psd,
  singular_innovation,
  // sync
  payload_size,
  not_in_progress,
  invalid_id,
  malformed_frame,
  // vm
  already_registered,
  payload_too_large,
  hook_failure,
  // geom
  empty_set,
  empty_map,
  size_mismatch,
  // cli / simworld
  config_invalid,
  budget_exceeded,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace syrof
