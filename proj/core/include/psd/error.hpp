#pragma once

#include <stdexcept>
#include <string>

namespace psd {

// Base of every error raised by the library. `kind()` is the stable,
// machine-parsable tag printed by the CLI on failure.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PSD_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

PSD_DEFINE_ERROR(IoError)
PSD_DEFINE_ERROR(FormatError)
PSD_DEFINE_ERROR(ValueError)
PSD_DEFINE_ERROR(RangeError)
PSD_DEFINE_ERROR(DegenerateSystem)
PSD_DEFINE_ERROR(EmptyIndex)
PSD_DEFINE_ERROR(EmptyInput)
PSD_DEFINE_ERROR(EmptyMask)
PSD_DEFINE_ERROR(SpecError)
PSD_DEFINE_ERROR(ConfigError)

#undef PSD_DEFINE_ERROR

}  // namespace psd
