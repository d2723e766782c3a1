#include "mlsa/error.hpp"

namespace mlsa {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::NonUniqueStationary: return "NonUniqueStationary";
        case ErrorCode::DegenerateStationary: return "DegenerateStationary";
        case ErrorCode::SpectralFailure: return "SpectralFailure";
        case ErrorCode::MixingTimeout: return "MixingTimeout";
        case ErrorCode::SingularMeanMatrix: return "SingularMeanMatrix";
        case ErrorCode::NotHurwitz: return "NotHurwitz";
        case ErrorCode::LyapunovFailure: return "LyapunovFailure";
        case ErrorCode::Diverged: return "Diverged";
        case ErrorCode::DegenerateScheme: return "DegenerateScheme";
        case ErrorCode::AlignmentError: return "AlignmentError";
        case ErrorCode::OracleSingular: return "OracleSingular";
        case ErrorCode::SeriesDivergent: return "SeriesDivergent";
        case ErrorCode::NotReversible: return "NotReversible";
        case ErrorCode::RankDeficientFeatures: return "RankDeficientFeatures";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace mlsa
