#pragma once

#include <stdexcept>

namespace geoaff {

// Error taxonomy mirrors the CLI exit-code contract (see README):
//   ValidationError -> exit 1 (bad or inconsistent input data / config)
//   IoError         -> exit 2 (unreadable or unwritable files, locked output dir)
//   NumericalError  -> exit 3 (degenerate inputs to a statistic, singular systems)
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geoaff
