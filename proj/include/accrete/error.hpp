#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace accrete {

enum class ErrorKind {
  Domain,            // argument outside the mathematical domain
  Format,            // structurally invalid input (missing header, bad field)
  CorruptInput,      // too many malformed lines
  DegenerateCorpus,  // horizon shorter than one step
  NoSlices,          // not enough articles to form one slice
  InsufficientData,  // too few points/slices/periods for an estimate
  DegenerateFit,     // zero variance where a spread is required
  InsufficientTail,  // nothing above the power-law cutoff
  Labeling,          // article missing from the labeling file
  Normalization,     // no usable mu/sigma at an article's age
  Numerical,         // quadrature or optimizer failed to converge
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Process exit code for an error category. 2 config, 3 I/O, 4 data, 5 numerical.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace accrete
