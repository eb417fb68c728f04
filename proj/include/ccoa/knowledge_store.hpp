#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccoa/embedding.hpp"
#include "ccoa/hopfield.hpp"

namespace ccoa {

struct Document {
    std::string id;
    std::string title;
    std::string text;
    std::string source; // path or url
};

/// Token window of a document. `token_span` is [start, end) in whitespace
/// token offsets; `text` is the span re-joined with single spaces.
struct Chunk {
    std::string id;
    std::string doc_id;
    std::size_t token_start = 0;
    std::size_t token_end = 0;
    std::string text;
    Vec embedding;
};

struct ChunkMeta {
    std::string id;
    std::string doc_id;
    std::size_t token_start = 0;
    std::size_t token_end = 0;
    std::string text;
};

struct ChunkingConfig {
    std::size_t size = 256;    // tokens per chunk
    std::size_t overlap = 32;  // tokens shared between adjacent chunks
    bool quantized = false;    // store vectors as int8 + per-row scale
};

/// Searchable snapshot over a chunked corpus. `bank` holds the embeddings
/// exactly as they round-trip through the on-disk format (float32 components,
/// or dequantized int8 when `quantized`), so search results never change
/// across save/load.
struct Index {
    std::size_t dim = 0;
    std::string provider; // embedding provider identity
    bool quantized = false;
    std::vector<ChunkMeta> chunks;
    MemoryBank bank;
    std::vector<QuantizedVector> qrows; // populated only when quantized
};

struct RetrievalResult {
    std::string chunk_id;
    double score = 0.0;
    std::string text;
    std::size_t rank = 0; // 1-based, contiguous
};

/// Sliding whitespace-token windows of `size` with stride size - overlap; the
/// final window may be shorter, and every token lands in at least one chunk.
/// Throws EmptyDocument when the text has no tokens, ConfigChunkingInvalid
/// when overlap >= size.
std::vector<Chunk> chunk_document(const Document& doc, std::size_t size,
                                  std::size_t overlap);

/// Chunks and embeds every document into a fresh index. Deterministic for a
/// deterministic provider. Throws EmptyCorpus on zero documents.
Index build_index(const std::vector<Document>& docs, const EmbeddingProvider& provider,
                  const ChunkingConfig& config);

/// Embeds the query, runs segmented retrieval over the index bank, and maps
/// ids back to chunks. `segments` is clamped to the chunk count.
/// Throws IndexProviderMismatch when the provider identity differs from the
/// one the index was built with.
std::vector<RetrievalResult> search(const Index& index, const std::string& query_text,
                                    std::size_t k, const EmbeddingProvider& provider,
                                    const HopfieldProjections& proj,
                                    std::size_t segments = 1);

/// Binary index file: "CCOA" magic + version 0x01, a length-prefixed JSON
/// header, the raw vector block, and a trailing CRC32 of all prior bytes.
void save_index(const Index& index, const std::string& path);

/// Throws UnsupportedIndexVersion on bad magic/version and CorruptIndex on
/// truncation or checksum failure.
Index load_index(const std::string& path);

/// Reads newline-delimited JSON corpus records {"id", "title", "text"}
/// (optional "source").
std::vector<Document> load_corpus(const std::string& path);

} // namespace ccoa
