#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wsnho {

enum class Errc {
  PastTime,
  ZeroDistance,
  CoLocated,
  InvalidProfile,
  InvalidPath,
  UnknownNeighbor,
  Unreachable,
  LoopDetected,
  NoMotesInRange,
  NoSatellite,
  UnknownCounter,
  RegistryMismatch,
  NoSignificantChange,
  ParseError,
  ValidationError,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::PastTime: return "PastTime";
    case Errc::ZeroDistance: return "ZeroDistance";
    case Errc::CoLocated: return "CoLocated";
    case Errc::InvalidProfile: return "InvalidProfile";
    case Errc::InvalidPath: return "InvalidPath";
    case Errc::UnknownNeighbor: return "UnknownNeighbor";
    case Errc::Unreachable: return "Unreachable";
    case Errc::LoopDetected: return "LoopDetected";
    case Errc::NoMotesInRange: return "NoMotesInRange";
    case Errc::NoSatellite: return "NoSatellite";
    case Errc::UnknownCounter: return "UnknownCounter";
    case Errc::RegistryMismatch: return "RegistryMismatch";
    case Errc::NoSignificantChange: return "NoSignificantChange";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

// Every failure in the library is reported as an Error carrying its code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace wsnho
