#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpviz {

enum class Errc {
  // tensor_io
  MagicMismatch,
  UnsupportedVersion,
  UnsupportedDtype,
  FortranOrderUnsupported,
  NonFiniteData,
  ShapeRankUnsupported,
  InvalidShape,
  MalformedHeader,
  TruncatedData,
  IoError,
  MissingColumn,
  DuplicateImageId,
  EmptyFile,
  // pointset
  RankError,
  AlreadyScaled,
  InvalidRange,
  LengthMismatch,
  ModeError,
  // dpgmm
  DomainError,
  EmptyInput,
  EmptyPointSet,
  DimMismatch,
  InvalidConfig,
  NonFiniteElbo,
  MalformedModel,
  // labelmap
  PaletteTooSmall,
  InvalidImage,
  NoForegroundClusters,
  // analysis
  TooFewPoints,
  InvalidSpec,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for the library. The code identifies the failure
/// class; the message carries the detail (file, offending value).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dpviz
