#pragma once

#include <stdexcept>
#include <string>

namespace pastsgd {

// Bad run configuration (unknown keys, missing fields, out-of-range values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable data files (CSV / IDX parse failures, missing files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pastsgd
