#pragma once

#include <stdexcept>
#include <string>

namespace mtk {

// Malformed or inconsistent input files (JSON schema violations, bad
// references, size mismatches).  The message carries the file path and the
// offending field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mtk
