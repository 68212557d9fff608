#include "stereogen/error.hpp"

namespace stereogen {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_depth: return "invalid-depth";
    case ErrorKind::behind_camera: return "behind-camera";
    case ErrorKind::shape: return "shape";
    case ErrorKind::size: return "size";
    case ErrorKind::format: return "format";
    case ErrorKind::missing_frame: return "missing-frame";
    case ErrorKind::io: return "io";
    case ErrorKind::output_exists: return "output-exists";
    case ErrorKind::manifest: return "manifest";
    case ErrorKind::sequence_length: return "sequence-length";
    case ErrorKind::provider_failure: return "provider-failure";
    case ErrorKind::provider_contract: return "provider-contract";
    case ErrorKind::unsupported_analytic_case: return "unsupported-analytic-case";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

}  // namespace stereogen
