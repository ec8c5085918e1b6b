#include "ct/error.hpp"

namespace ct {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::NoBins: return "NoBins";
    case Errc::AlreadyNormalized: return "AlreadyNormalized";
    case Errc::IoError: return "IoError";
    case Errc::FormatError: return "FormatError";
    case Errc::UnknownFeed: return "UnknownFeed";
    case Errc::NotEnoughFeeds: return "NotEnoughFeeds";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::SingularRhs: return "SingularRhs";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonLinearKernel: return "NonLinearKernel";
    case Errc::TooShortForFolds: return "TooShortForFolds";
    case Errc::DegenerateProjection: return "DegenerateProjection";
    case Errc::BadConfig: return "BadConfig";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace ct
