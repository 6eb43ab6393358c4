#include "accrete/error.hpp"

namespace accrete {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::CorruptInput: return "corrupt input";
    case ErrorKind::DegenerateCorpus: return "degenerate corpus";
    case ErrorKind::NoSlices: return "no slices";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::DegenerateFit: return "degenerate fit";
    case ErrorKind::InsufficientTail: return "insufficient tail";
    case ErrorKind::Labeling: return "labeling error";
    case ErrorKind::Normalization: return "normalization error";
    case ErrorKind::Numerical: return "numerical error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Io: return "I/O error";
  }
  return "error";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::Numerical: return 5;
    default: return 4;
  }
}

}  // namespace accrete
