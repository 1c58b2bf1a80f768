#pragma once

#include <stdexcept>
#include <string>

namespace clickstream {

/// Base class for every error raised by the library. Usage errors in the CLI
/// are reported separately; anything deriving from Error maps to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CLICKSTREAM_DEFINE_ERROR(Name)          \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(#Name ": " + what) {}           \
  }

CLICKSTREAM_DEFINE_ERROR(UnknownEventType);
CLICKSTREAM_DEFINE_ERROR(FormatError);
CLICKSTREAM_DEFINE_ERROR(EmptySession);
CLICKSTREAM_DEFINE_ERROR(InsufficientData);
CLICKSTREAM_DEFINE_ERROR(SessionTooShort);
CLICKSTREAM_DEFINE_ERROR(EmptyInput);
CLICKSTREAM_DEFINE_ERROR(EmptySplit);
CLICKSTREAM_DEFINE_ERROR(InvalidSpec);
CLICKSTREAM_DEFINE_ERROR(ShapeMismatch);

#undef CLICKSTREAM_DEFINE_ERROR

}  // namespace clickstream
