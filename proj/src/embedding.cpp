#include "ccoa/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <mutex>

#include "httplib.h"
#include "json.hpp"

#include "ccoa/text_util.hpp"
#include "http_util.hpp"

namespace ccoa {

namespace {

// Seeded FNV-1a over the token bytes; bucket from the low bits, sign from an
// independent part of the state.
std::uint64_t fnv1a(const std::string& s, std::uint64_t seed) {
    std::uint64_t h = 1469598103934665603ull ^ (seed * 0x9e3779b97f4a7c15ull);
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

void hash_into(const std::string& feature, std::uint64_t seed, Vec& acc) {
    const std::uint64_t h = fnv1a(feature, seed);
    const std::size_t bucket = h % acc.size();
    const double sign = ((h >> 32) & 1u) ? 1.0 : -1.0;
    acc[bucket] += sign;
}

// Mutex-based semaphore; the in-flight bound is a runtime value.
class InflightLimiter {
public:
    explicit InflightLimiter(int limit) : available_(limit < 1 ? 1 : limit) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return available_ > 0; });
        --available_;
    }
    void release() {
        {
            std::lock_guard lock(mu_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int available_;
};

} // namespace

std::vector<Vec> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<Vec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

Vec hash_embed(const std::string& text, std::size_t dim, std::uint64_t seed) {
    if (dim < 8) {
        throw Error(ErrorCode::InvalidDimension, "hash_embed: dim must be >= 8");
    }
    const std::vector<std::string> tokens = content_tokens(text);
    Vec v(dim, 0.0);
    if (tokens.empty()) {
        v[0] = 1.0;
        return v;
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        hash_into(tokens[i], seed, v);
        if (i + 1 < tokens.size()) {
            hash_into(tokens[i] + " " + tokens[i + 1], seed, v);
        }
    }
    const double norm = norm2(v);
    if (norm == 0.0) {
        // all hashed signs cancelled; fall back to the empty-stream vector
        std::fill(v.begin(), v.end(), 0.0);
        v[0] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed),
      name_("hash(dim=" + std::to_string(dim) + ",seed=" + std::to_string(seed) + ")") {
    if (dim < 8) {
        throw Error(ErrorCode::InvalidDimension, "HashEmbedder: dim must be >= 8");
    }
}

Vec HashEmbedder::embed(const std::string& text) const {
    return hash_embed(text, dim_, seed_);
}

struct RemoteEmbedder::Impl {
    std::string base;
    std::string path;
    std::string model;
    mutable InflightLimiter limiter;

    Impl(const std::string& endpoint, std::string model_in, int max_inflight)
        : model(std::move(model_in)), limiter(max_inflight) {
        auto [b, p] = detail::split_endpoint(endpoint);
        base = std::move(b);
        path = std::move(p);
    }
};

RemoteEmbedder::RemoteEmbedder(std::string endpoint, std::string model, std::size_t dim,
                               int max_inflight)
    : impl_(std::make_unique<Impl>(endpoint, std::move(model), max_inflight)),
      name_("remote(model=" + impl_->model + ",dim=" + std::to_string(dim) + ")"),
      dim_(dim) {}

RemoteEmbedder::~RemoteEmbedder() = default;

Vec RemoteEmbedder::embed(const std::string& text) const {
    return embed_batch({text}).front();
}

std::vector<Vec> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) const {
    if (texts.empty()) return {};

    nlohmann::json request = {{"model", impl_->model}, {"input", texts}};

    impl_->limiter.acquire();
    httplib::Client client(impl_->base);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    auto res = client.Post(impl_->path, request.dump(), "application/json");
    impl_->limiter.release();

    if (!res || res->status != 200) {
        throw Error(ErrorCode::ProviderUnavailable,
                    "embedding service at " + impl_->base + impl_->path + " unavailable" +
                        (res ? " (status " + std::to_string(res->status) + ")" : ""));
    }

    nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("data") || !body["data"].is_array()) {
        throw Error(ErrorCode::ProviderContractViolation,
                    "embedding response is not a {\"data\": [...]} document");
    }
    const auto& data = body["data"];
    if (data.size() != texts.size()) {
        throw Error(ErrorCode::ProviderContractViolation,
                    "embedding response count " + std::to_string(data.size()) +
                        " != input count " + std::to_string(texts.size()));
    }

    std::vector<Vec> out(texts.size());
    std::vector<bool> filled(texts.size(), false);
    for (const auto& item : data) {
        if (!item.contains("index") || !item.contains("embedding")) {
            throw Error(ErrorCode::ProviderContractViolation,
                        "embedding response item missing index/embedding");
        }
        const auto idx = item["index"].get<std::int64_t>();
        if (idx < 0 || static_cast<std::size_t>(idx) >= texts.size() ||
            filled[static_cast<std::size_t>(idx)]) {
            throw Error(ErrorCode::ProviderContractViolation,
                        "embedding response index out of range or duplicated");
        }
        Vec v = item["embedding"].get<Vec>();
        if (v.size() != dim_) {
            throw Error(ErrorCode::ProviderContractViolation,
                        "embedding dim " + std::to_string(v.size()) + " != declared " +
                            std::to_string(dim_));
        }
        out[static_cast<std::size_t>(idx)] = std::move(v);
        filled[static_cast<std::size_t>(idx)] = true;
    }
    return out;
}

std::vector<Vec> remote_embed(const std::string& endpoint, const std::string& model,
                              std::size_t dim, const std::vector<std::string>& texts) {
    RemoteEmbedder embedder(endpoint, model, dim);
    return embedder.embed_batch(texts);
}

QuantizedVector quantize_int8(const Vec& v) {
    require_finite_vector(v, "quantize_int8");
    double amax = 0.0;
    for (double x : v) amax = std::max(amax, std::abs(x));

    QuantizedVector q;
    q.values.resize(v.size(), 0);
    if (amax == 0.0) return q; // zero vector: scale 0, exact round-trip

    // The float32 scale is what gets persisted, so values are computed
    // against it rather than the double intermediate.
    q.scale = static_cast<float>(amax / 127.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const long long r = std::llround(v[i] / static_cast<double>(q.scale));
        q.values[i] = static_cast<std::int8_t>(std::clamp(r, -127ll, 127ll));
    }
    return q;
}

Vec dequantize(const QuantizedVector& q) {
    Vec v(q.values.size());
    for (std::size_t i = 0; i < q.values.size(); ++i) {
        v[i] = static_cast<double>(q.scale) * static_cast<double>(q.values[i]);
    }
    return v;
}

} // namespace ccoa
