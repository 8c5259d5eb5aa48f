#pragma once

#include <stdexcept>
#include <string>

namespace epi {

enum class ErrorCode {
  OffsetOutOfRange,
  InvalidConfig,
  SyntaxError,
  UndefinedLabel,
  BranchOutOfRange,
  ImmediateOutOfRange,
  IllegalOpcode,
  MemoryFault,
  ChannelBusy,
  InvalidDescriptor,
  ImageTooLarge,
  NoSuchCore,
  NotLoaded,
  Unmapped,
  BadImage,
  Usage,
};

const char* to_string(ErrorCode code);

// All recoverable failures surface as this exception; `code()` is what the
// CLI prints in its machine-readable error line.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

} // namespace epi
