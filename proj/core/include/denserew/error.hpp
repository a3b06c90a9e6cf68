#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace denserew {

enum class Errc {
  InvalidCapacity,
  InvalidWeights,
  DimensionError,
  StaleNode,
  InvalidTolerance,
  EmptySample,
  InsufficientData,
  InvalidEnv,
  EmptySequence,
  InvalidTree,
  TooManyPlayers,
  InvalidPartition,
  BoundaryError,
  InvalidAlpha,
  InvalidMdp,
  NotSymmetric,
  SizeMismatch,
  InsufficientGraph,
  InvalidArgument,
  ParseError,
  IoError,
};

constexpr std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidCapacity: return "InvalidCapacity";
    case Errc::InvalidWeights: return "InvalidWeights";
    case Errc::DimensionError: return "DimensionError";
    case Errc::StaleNode: return "StaleNodeError";
    case Errc::InvalidTolerance: return "InvalidTolerance";
    case Errc::EmptySample: return "EmptySample";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::InvalidEnv: return "InvalidEnv";
    case Errc::EmptySequence: return "EmptySequence";
    case Errc::InvalidTree: return "InvalidTree";
    case Errc::TooManyPlayers: return "TooManyPlayers";
    case Errc::InvalidPartition: return "InvalidPartition";
    case Errc::BoundaryError: return "BoundaryError";
    case Errc::InvalidAlpha: return "InvalidAlpha";
    case Errc::InvalidMdp: return "InvalidMDP";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::InsufficientGraph: return "InsufficientGraph";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// message is prefixed with the code name so CLI output stays greppable.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace denserew
