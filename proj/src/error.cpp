#include "dpviz/error.hpp"

namespace dpviz {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MagicMismatch: return "MagicMismatch";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::UnsupportedDtype: return "UnsupportedDtype";
    case Errc::FortranOrderUnsupported: return "FortranOrderUnsupported";
    case Errc::NonFiniteData: return "NonFiniteData";
    case Errc::ShapeRankUnsupported: return "ShapeRankUnsupported";
    case Errc::InvalidShape: return "InvalidShape";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::TruncatedData: return "TruncatedData";
    case Errc::IoError: return "IoError";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::DuplicateImageId: return "DuplicateImageId";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::RankError: return "RankError";
    case Errc::AlreadyScaled: return "AlreadyScaled";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ModeError: return "ModeError";
    case Errc::DomainError: return "DomainError";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptyPointSet: return "EmptyPointSet";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::NonFiniteElbo: return "NonFiniteElbo";
    case Errc::MalformedModel: return "MalformedModel";
    case Errc::PaletteTooSmall: return "PaletteTooSmall";
    case Errc::InvalidImage: return "InvalidImage";
    case Errc::NoForegroundClusters: return "NoForegroundClusters";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

}  // namespace dpviz
