#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "ccoa/error.hpp"

namespace ccoa {

/// One search hit: title, snippet, and the url to fetch for full content.
struct SearchResult {
    std::string title;
    std::string snippet;
    std::string url;
};

/// Web-search interface used by the web-querying action. Result order is the
/// provider's own ranking.
class SearchProvider {
public:
    virtual ~SearchProvider() = default;

    virtual std::vector<SearchResult> search(const std::string& keywords,
                                             std::size_t count) = 0;

    /// Full page text for a url previously returned by search().
    virtual std::string fetch(const std::string& url) = 0;

    virtual std::string name() const = 0;
};

/// HTTP search backend. Request {"q","count"}, response
/// {"results":[{"title","snippet","url"}]}. fetch() GETs the url directly.
class HttpSearchProvider : public SearchProvider {
public:
    explicit HttpSearchProvider(std::string endpoint);
    ~HttpSearchProvider() override;

    std::vector<SearchResult> search(const std::string& keywords,
                                     std::size_t count) override;
    std::string fetch(const std::string& url) override;
    std::string name() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Deterministic fixture backend for tests and offline runs. Fixture file is
/// JSON: {"pages":[{"title","snippet","url","content"}]}. search() returns
/// pages whose title or snippet shares at least one folded token with the
/// keywords, in fixture order; fetch() returns the matching page's content.
class FixtureSearchProvider : public SearchProvider {
public:
    struct Page {
        std::string title;
        std::string snippet;
        std::string url;
        std::string content;
    };

    explicit FixtureSearchProvider(std::vector<Page> pages);

    static FixtureSearchProvider from_file(const std::string& path);

    std::vector<SearchResult> search(const std::string& keywords,
                                     std::size_t count) override;
    std::string fetch(const std::string& url) override;
    std::string name() const override;

private:
    std::vector<Page> pages_;
};

} // namespace ccoa
