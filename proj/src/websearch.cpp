#include "ccoa/websearch.hpp"

#include <fstream>
#include <unordered_set>

#include "httplib.h"
#include "json.hpp"

#include "ccoa/text_util.hpp"
#include "http_util.hpp"

namespace ccoa {

struct HttpSearchProvider::Impl {
    std::string base;
    std::string path;
};

HttpSearchProvider::HttpSearchProvider(std::string endpoint)
    : impl_(std::make_unique<Impl>()) {
    auto [base, path] = detail::split_endpoint(endpoint);
    impl_->base = std::move(base);
    impl_->path = std::move(path);
}

HttpSearchProvider::~HttpSearchProvider() = default;

std::vector<SearchResult> HttpSearchProvider::search(const std::string& keywords,
                                                     std::size_t count) {
    nlohmann::json request = {{"q", keywords}, {"count", count}};

    httplib::Client client(impl_->base);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    auto res = client.Post(impl_->path, request.dump(), "application/json");
    if (!res || res->status != 200) {
        throw Error(ErrorCode::ProviderUnavailable,
                    "search endpoint unreachable: " + impl_->base);
    }
    nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("results") || !body["results"].is_array()) {
        throw Error(ErrorCode::ProviderContractViolation,
                    "search response missing results array");
    }
    std::vector<SearchResult> results;
    for (const auto& r : body["results"]) {
        if (!r.contains("title") || !r.contains("snippet") || !r.contains("url")) {
            throw Error(ErrorCode::ProviderContractViolation,
                        "search result missing title/snippet/url");
        }
        results.push_back({r["title"].get<std::string>(), r["snippet"].get<std::string>(),
                           r["url"].get<std::string>()});
        if (results.size() == count) break;
    }
    return results;
}

std::string HttpSearchProvider::fetch(const std::string& url) {
    auto [base, path] = detail::split_endpoint(url);
    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    auto res = client.Get(path);
    if (!res || res->status != 200) {
        throw Error(ErrorCode::ProviderUnavailable, "cannot fetch page: " + url);
    }
    return res->body;
}

std::string HttpSearchProvider::name() const {
    return "http-search(" + impl_->base + ")";
}

FixtureSearchProvider::FixtureSearchProvider(std::vector<Page> pages)
    : pages_(std::move(pages)) {}

FixtureSearchProvider FixtureSearchProvider::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open search fixture: " + path);
    }
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("pages") || !doc["pages"].is_array()) {
        throw Error(ErrorCode::ProviderContractViolation,
                    "search fixture must be {\"pages\": [...]}: " + path);
    }
    std::vector<Page> pages;
    for (const auto& p : doc["pages"]) {
        pages.push_back({p.value("title", ""), p.value("snippet", ""),
                         p.value("url", ""), p.value("content", "")});
    }
    return FixtureSearchProvider(std::move(pages));
}

std::vector<SearchResult> FixtureSearchProvider::search(const std::string& keywords,
                                                        std::size_t count) {
    std::unordered_set<std::string> query_tokens;
    for (auto& t : content_tokens(keywords)) query_tokens.insert(std::move(t));

    std::vector<SearchResult> results;
    for (const auto& page : pages_) {
        bool hit = false;
        for (const auto& t : content_tokens(page.title + " " + page.snippet)) {
            if (query_tokens.count(t)) {
                hit = true;
                break;
            }
        }
        if (hit) {
            results.push_back({page.title, page.snippet, page.url});
            if (results.size() == count) break;
        }
    }
    return results;
}

std::string FixtureSearchProvider::fetch(const std::string& url) {
    for (const auto& page : pages_) {
        if (page.url == url) return page.content;
    }
    throw Error(ErrorCode::ProviderUnavailable, "fixture has no page for url: " + url);
}

std::string FixtureSearchProvider::name() const {
    return "fixture-search(n=" + std::to_string(pages_.size()) + ")";
}

} // namespace ccoa
