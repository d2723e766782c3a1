#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mlsa {

enum class ErrorCode {
    InvalidParameter,
    NonUniqueStationary,
    DegenerateStationary,
    SpectralFailure,
    MixingTimeout,
    SingularMeanMatrix,
    NotHurwitz,
    LyapunovFailure,
    Diverged,
    DegenerateScheme,
    AlignmentError,
    OracleSingular,
    SeriesDivergent,
    NotReversible,
    RankDeficientFeatures,
    ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Iterate norm left the stable region; `step` is the first offending k.
class DivergedError : public Error {
public:
    DivergedError(std::size_t step, double alpha)
        : Error(ErrorCode::Diverged,
                "iterate norm exceeded threshold at k=" + std::to_string(step) +
                    " (alpha=" + std::to_string(alpha) + ")"),
          step_(step), alpha_(alpha) {}

    std::size_t step() const noexcept { return step_; }
    double alpha() const noexcept { return alpha_; }

private:
    std::size_t step_;
    double alpha_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace mlsa
