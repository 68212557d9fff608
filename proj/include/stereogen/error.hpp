#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace stereogen {

/// Failure classes surfaced to callers and, through the CLI, to scripts.
enum class ErrorKind {
  invalid_argument,
  invalid_depth,
  behind_camera,
  shape,
  size,
  format,
  missing_frame,
  io,
  output_exists,
  manifest,
  sequence_length,
  provider_failure,
  provider_contract,
  unsupported_analytic_case,
  usage,
};

/// Stable kebab-case name, e.g. "provider-failure".
std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Error raised by the stereo orchestrator; pins down where the job died.
class JobError : public Error {
 public:
  JobError(ErrorKind kind, const std::string& message, std::string stage,
           std::optional<std::size_t> frame)
      : Error(kind, message), stage_(std::move(stage)), frame_(frame) {}

  const std::string& stage() const noexcept { return stage_; }
  std::optional<std::size_t> frame() const noexcept { return frame_; }

 private:
  std::string stage_;
  std::optional<std::size_t> frame_;
};

}  // namespace stereogen
