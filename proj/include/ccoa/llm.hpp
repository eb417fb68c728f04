#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "ccoa/error.hpp"

namespace ccoa {

/// Text-completion interface the pipeline talks to.
class LLMClient {
public:
    virtual ~LLMClient() = default;

    /// One prompt in, one completion out. Throws ProviderUnavailable or
    /// ProviderContractViolation on transport/shape failures.
    virtual std::string complete(const std::string& prompt) = 0;

    virtual std::string name() const = 0;
};

/// Chat-completions HTTP client. Request body
/// {"model","messages":[{"role":"user","content"}],"temperature"}, response
/// {"choices":[{"message":{"content"}}]}.
class HttpLlmClient : public LLMClient {
public:
    HttpLlmClient(std::string endpoint, std::string model, double temperature = 0.0);
    ~HttpLlmClient() override;

    std::string complete(const std::string& prompt) override;
    std::string name() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Deterministic mock replaying canned completions in order. Script file is
/// JSON: {"completions": ["...", "..."]}. Running past the end throws
/// ProviderContractViolation.
class ScriptedLlmClient : public LLMClient {
public:
    explicit ScriptedLlmClient(std::vector<std::string> completions);

    /// Loads {"completions": [...]} from a JSON file.
    static ScriptedLlmClient from_file(const std::string& path);

    std::string complete(const std::string& prompt) override;
    std::string name() const override;

    std::size_t consumed() const { return next_; }

private:
    std::vector<std::string> completions_;
    std::size_t next_ = 0;
};

} // namespace ccoa
