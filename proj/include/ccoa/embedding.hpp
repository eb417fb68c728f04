#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ccoa/linalg.hpp"

namespace ccoa {

/// Text-to-vector provider. Implementations must be deterministic (same text,
/// same vector within a session) and safe for concurrent embed calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual Vec embed(const std::string& text) const = 0;

    /// One vector per input text, order-preserving. Default loops embed().
    virtual std::vector<Vec> embed_batch(const std::vector<std::string>& texts) const;

    /// Identity string recorded in indexes for compatibility checks.
    virtual const std::string& name() const = 0;
    virtual std::size_t dim() const = 0;
};

/// Deterministic offline embedding: signed feature hashing of token unigrams
/// and bigrams (lowercased, punctuation stripped), L2-normalized. Text that
/// folds to zero tokens maps to the first basis vector.
/// Throws InvalidDimension when dim < 8.
Vec hash_embed(const std::string& text, std::size_t dim, std::uint64_t seed);

class HashEmbedder final : public EmbeddingProvider {
public:
    HashEmbedder(std::size_t dim, std::uint64_t seed);

    Vec embed(const std::string& text) const override;
    const std::string& name() const override { return name_; }
    std::size_t dim() const override { return dim_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
    std::string name_;
};

/// Client for an HTTP embedding service.
/// Request:  POST {"model": string, "input": [string]}
/// Response: {"data": [{"index": int, "embedding": [number]}]}, re-ordered
/// by "index" before returning. At most `max_inflight` requests run
/// concurrently. Throws ProviderUnavailable on transport failure and
/// ProviderContractViolation when the response shape or dim is wrong.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    RemoteEmbedder(std::string endpoint, std::string model, std::size_t dim,
                   int max_inflight = 4);
    ~RemoteEmbedder() override;

    Vec embed(const std::string& text) const override;
    std::vector<Vec> embed_batch(const std::vector<std::string>& texts) const override;
    const std::string& name() const override { return name_; }
    std::size_t dim() const override { return dim_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string name_;
    std::size_t dim_;
};

/// Convenience wrapper around RemoteEmbedder::embed_batch for one-shot use.
std::vector<Vec> remote_embed(const std::string& endpoint, const std::string& model,
                              std::size_t dim, const std::vector<std::string>& texts);

/// Symmetric per-vector int8 quantization: scale = max|v_i| / 127,
/// values_i = round-half-away(v_i / scale). The zero vector quantizes to
/// scale 0 with all-zero values. Componentwise round-trip error <= scale/2.
struct QuantizedVector {
    float scale = 0.0f;
    std::vector<std::int8_t> values;
};

QuantizedVector quantize_int8(const Vec& v);
Vec dequantize(const QuantizedVector& q);

} // namespace ccoa
