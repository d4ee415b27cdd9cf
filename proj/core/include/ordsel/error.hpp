#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ordsel {

enum class ErrorCode {
  DuplicateAttribute,
  NotAPrefix,
  Validation,
  Io,
  InvalidAssignment,
  NotAPath,
  NotABinaryTree,
  TooLarge,
  InputNotSorted,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library. `path` names the offending
/// element (JSON pointer, file name, record position) when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string path = {})
      : std::runtime_error(std::move(message)), code_(code), path_(std::move(path)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::string path_;
};

}  // namespace ordsel
