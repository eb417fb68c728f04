#include "ccoa/llm.hpp"

#include <fstream>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "http_util.hpp"

namespace ccoa {

struct HttpLlmClient::Impl {
    std::string base;
    std::string path;
    std::string model;
    double temperature;
};

HttpLlmClient::HttpLlmClient(std::string endpoint, std::string model, double temperature)
    : impl_(std::make_unique<Impl>()) {
    auto [base, path] = detail::split_endpoint(endpoint);
    impl_->base = std::move(base);
    impl_->path = std::move(path);
    impl_->model = std::move(model);
    impl_->temperature = temperature;
}

HttpLlmClient::~HttpLlmClient() = default;

std::string HttpLlmClient::complete(const std::string& prompt) {
    nlohmann::json request = {
        {"model", impl_->model},
        {"messages", {{{"role", "user"}, {"content", prompt}}}},
        {"temperature", impl_->temperature},
    };

    httplib::Client client(impl_->base);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    auto res = client.Post(impl_->path, request.dump(), "application/json");
    if (!res) {
        throw Error(ErrorCode::ProviderUnavailable,
                    "LLM endpoint unreachable: " + impl_->base);
    }
    if (res->status != 200) {
        throw Error(ErrorCode::ProviderUnavailable,
                    "LLM endpoint returned HTTP " + std::to_string(res->status));
    }
    nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("choices") || !body["choices"].is_array() ||
        body["choices"].empty() || !body["choices"][0].contains("message") ||
        !body["choices"][0]["message"].contains("content") ||
        !body["choices"][0]["message"]["content"].is_string()) {
        throw Error(ErrorCode::ProviderContractViolation,
                    "LLM response missing choices[0].message.content");
    }
    return body["choices"][0]["message"]["content"].get<std::string>();
}

std::string HttpLlmClient::name() const {
    return "http(model=" + impl_->model + ")";
}

ScriptedLlmClient::ScriptedLlmClient(std::vector<std::string> completions)
    : completions_(std::move(completions)) {}

ScriptedLlmClient ScriptedLlmClient::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open LLM script: " + path);
    }
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("completions") ||
        !doc["completions"].is_array()) {
        throw Error(ErrorCode::ProviderContractViolation,
                    "LLM script must be {\"completions\": [...]}: " + path);
    }
    std::vector<std::string> completions;
    for (const auto& c : doc["completions"]) {
        if (!c.is_string()) {
            throw Error(ErrorCode::ProviderContractViolation,
                        "LLM script completions must be strings: " + path);
        }
        completions.push_back(c.get<std::string>());
    }
    return ScriptedLlmClient(std::move(completions));
}

std::string ScriptedLlmClient::complete(const std::string&) {
    if (next_ >= completions_.size()) {
        throw Error(ErrorCode::ProviderContractViolation,
                    "scripted LLM exhausted after " + std::to_string(next_) +
                        " completions");
    }
    return completions_[next_++];
}

std::string ScriptedLlmClient::name() const {
    return "scripted(n=" + std::to_string(completions_.size()) + ")";
}

} // namespace ccoa
