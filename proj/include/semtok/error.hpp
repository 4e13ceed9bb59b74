#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semtok {

// Base class for every data/contract error surfaced by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Strict-parse failure carrying the byte offset of the offending input.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " at byte " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace semtok
