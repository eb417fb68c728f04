#pragma once

#include <stdexcept>
#include <string>

namespace ccoa {

// Every failure mode the library reports. The CLI prints the code name as a
// stable machine-parsable token, so names here are part of the tool contract.
enum class ErrorCode {
    InvalidDimension,
    InvalidValue,
    ZeroVector,
    EmptyMemory,
    InvalidSegmentation,
    InsufficientNegatives,
    NumericalDivergence,
    ProviderUnavailable,
    ProviderContractViolation,
    EmptyDocument,
    EmptyCorpus,
    IndexProviderMismatch,
    UnsupportedIndexVersion,
    CorruptIndex,
    RoundSequenceError,
    CksParseError,
    EmptyQuestion,
    ChainParseError,
    EmptyChain,
    UnknownAction,
    ActionFailed,
    EmptyRetrieval,
    UnresolvedNode,
    TurnFailed,
    EmptyAnswer,
    NoQueries,
    JudgeParseError,
    ConfigWeightsInvalid,
    ConfigChunkingInvalid,
    ConfigSimilarityInvalid,
    ConfigBetaInvalid,
    ConfigTopKInvalid,
    ConfigParseError,
    IoError,
};

/// Stable SCREAMING_SNAKE token for an error code (e.g. "EMPTY_CORPUS").
const char* error_code_name(ErrorCode code);

/// Exception carrying a typed error code plus a human-readable message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    const char* code_name() const noexcept { return error_code_name(code_); }

private:
    ErrorCode code_;
};

} // namespace ccoa
