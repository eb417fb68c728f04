#include "ccoa/error.hpp"

namespace ccoa {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidDimension: return "INVALID_DIMENSION";
        case ErrorCode::InvalidValue: return "INVALID_VALUE";
        case ErrorCode::ZeroVector: return "ZERO_VECTOR";
        case ErrorCode::EmptyMemory: return "EMPTY_MEMORY";
        case ErrorCode::InvalidSegmentation: return "INVALID_SEGMENTATION";
        case ErrorCode::InsufficientNegatives: return "INSUFFICIENT_NEGATIVES";
        case ErrorCode::NumericalDivergence: return "NUMERICAL_DIVERGENCE";
        case ErrorCode::ProviderUnavailable: return "PROVIDER_UNAVAILABLE";
        case ErrorCode::ProviderContractViolation: return "PROVIDER_CONTRACT_VIOLATION";
        case ErrorCode::EmptyDocument: return "EMPTY_DOCUMENT";
        case ErrorCode::EmptyCorpus: return "EMPTY_CORPUS";
        case ErrorCode::IndexProviderMismatch: return "INDEX_PROVIDER_MISMATCH";
        case ErrorCode::UnsupportedIndexVersion: return "UNSUPPORTED_INDEX_VERSION";
        case ErrorCode::CorruptIndex: return "CORRUPT_INDEX";
        case ErrorCode::RoundSequenceError: return "ROUND_SEQUENCE_ERROR";
        case ErrorCode::CksParseError: return "CKS_PARSE_ERROR";
        case ErrorCode::EmptyQuestion: return "EMPTY_QUESTION";
        case ErrorCode::ChainParseError: return "CHAIN_PARSE_ERROR";
        case ErrorCode::EmptyChain: return "EMPTY_CHAIN";
        case ErrorCode::UnknownAction: return "UNKNOWN_ACTION";
        case ErrorCode::ActionFailed: return "ACTION_FAILED";
        case ErrorCode::EmptyRetrieval: return "EMPTY_RETRIEVAL";
        case ErrorCode::UnresolvedNode: return "UNRESOLVED_NODE";
        case ErrorCode::TurnFailed: return "TURN_FAILED";
        case ErrorCode::EmptyAnswer: return "EMPTY_ANSWER";
        case ErrorCode::NoQueries: return "NO_QUERIES";
        case ErrorCode::JudgeParseError: return "JUDGE_PARSE_ERROR";
        case ErrorCode::ConfigWeightsInvalid: return "CONFIG_WEIGHTS_INVALID";
        case ErrorCode::ConfigChunkingInvalid: return "CONFIG_CHUNKING_INVALID";
        case ErrorCode::ConfigSimilarityInvalid: return "CONFIG_SIMILARITY_INVALID";
        case ErrorCode::ConfigBetaInvalid: return "CONFIG_BETA_INVALID";
        case ErrorCode::ConfigTopKInvalid: return "CONFIG_TOPK_INVALID";
        case ErrorCode::ConfigParseError: return "CONFIG_PARSE_ERROR";
        case ErrorCode::IoError: return "IO_ERROR";
    }
    return "UNKNOWN_ERROR";
}

} // namespace ccoa
