#include "kgc/error.hpp"

namespace kgc {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::RejectedMotion: return "RejectedMotion";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::DegenerateMap: return "DegenerateMap";
        case ErrorKind::NeutralPoint: return "NeutralPoint";
        case ErrorKind::NoAttractor: return "NoAttractor";
        case ErrorKind::AmbiguousResonance: return "AmbiguousResonance";
        case ErrorKind::NotHyperbolic: return "NotHyperbolic";
        case ErrorKind::IncompatibleData: return "IncompatibleData";
        case ErrorKind::BumpOutOfRange: return "BumpOutOfRange";
        case ErrorKind::MissingAnalysis: return "MissingAnalysis";
        case ErrorKind::OutsideDomain: return "OutsideDomain";
        case ErrorKind::NotConverged: return "NotConverged";
        case ErrorKind::SliceUnavailable: return "SliceUnavailable";
        case ErrorKind::Unstable: return "Unstable";
        case ErrorKind::NoOverlap: return "NoOverlap";
        case ErrorKind::TooFewWindows: return "TooFewWindows";
        case ErrorKind::NonpositiveEnergy: return "NonpositiveEnergy";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace kgc
