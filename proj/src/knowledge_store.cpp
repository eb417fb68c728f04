#include "ccoa/knowledge_store.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <zlib.h>

#include "json.hpp"

#include "ccoa/text_util.hpp"

namespace ccoa {

namespace {

constexpr char kMagic[4] = {'C', 'C', 'O', 'A'};
constexpr std::uint8_t kVersion = 0x01;

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::string& buf, std::size_t pos) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + 3])) << 24;
}

void put_f32(std::string& out, float f) {
    put_u32(out, std::bit_cast<std::uint32_t>(f));
}

float get_f32(const std::string& buf, std::size_t pos) {
    return std::bit_cast<float>(get_u32(buf, pos));
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin,
                        std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::uint32_t crc_of(const std::string& buf, std::size_t len) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(len)));
}

} // namespace

std::vector<Chunk> chunk_document(const Document& doc, std::size_t size,
                                  std::size_t overlap) {
    if (size == 0 || overlap >= size) {
        throw Error(ErrorCode::ConfigChunkingInvalid,
                    "chunking requires 0 <= overlap < size");
    }
    const std::vector<std::string> tokens = whitespace_tokens(doc.text);
    if (tokens.empty()) {
        throw Error(ErrorCode::EmptyDocument, "document '" + doc.id + "' has no tokens");
    }

    const std::size_t stride = size - overlap;
    std::vector<Chunk> chunks;
    std::size_t start = 0;
    while (start + size < tokens.size()) {
        chunks.push_back({doc.id + "#" + std::to_string(chunks.size()), doc.id, start,
                          start + size, join_tokens(tokens, start, start + size), {}});
        start += stride;
    }
    chunks.push_back({doc.id + "#" + std::to_string(chunks.size()), doc.id, start,
                      tokens.size(), join_tokens(tokens, start, tokens.size()), {}});
    return chunks;
}

Index build_index(const std::vector<Document>& docs, const EmbeddingProvider& provider,
                  const ChunkingConfig& config) {
    if (docs.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "no documents to index");
    }
    std::unordered_set<std::string> doc_ids;
    std::vector<ChunkMeta> metas;
    std::vector<std::string> texts;
    for (const auto& doc : docs) {
        if (!doc_ids.insert(doc.id).second) {
            throw Error(ErrorCode::InvalidValue, "duplicate document id '" + doc.id + "'");
        }
        for (auto& chunk : chunk_document(doc, config.size, config.overlap)) {
            metas.push_back({chunk.id, chunk.doc_id, chunk.token_start, chunk.token_end,
                             std::move(chunk.text)});
            texts.push_back(metas.back().text);
        }
    }

    const std::vector<Vec> embeddings = provider.embed_batch(texts);

    Index index;
    index.dim = provider.dim();
    index.provider = provider.name();
    index.quantized = config.quantized;
    index.chunks = std::move(metas);

    // Bank components always match the on-disk representation exactly:
    // float32-narrowed floats, or dequantized int8 when quantized.
    Matrix patterns(embeddings.size(), index.dim);
    std::vector<std::string> ids;
    ids.reserve(index.chunks.size());
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        ids.push_back(index.chunks[i].id);
        if (config.quantized) {
            QuantizedVector q = quantize_int8(embeddings[i]);
            const Vec deq = dequantize(q);
            std::copy(deq.begin(), deq.end(), patterns.row(i));
            index.qrows.push_back(std::move(q));
        } else {
            for (std::size_t c = 0; c < index.dim; ++c) {
                patterns.at(i, c) = static_cast<double>(static_cast<float>(embeddings[i][c]));
            }
        }
    }
    index.bank = MemoryBank(std::move(patterns), std::move(ids));
    return index;
}

std::vector<RetrievalResult> search(const Index& index, const std::string& query_text,
                                    std::size_t k, const EmbeddingProvider& provider,
                                    const HopfieldProjections& proj, std::size_t segments) {
    if (provider.name() != index.provider) {
        throw Error(ErrorCode::IndexProviderMismatch,
                    "index built with '" + index.provider + "', queried with '" +
                        provider.name() + "'");
    }
    const Vec query = provider.embed(query_text);
    const std::size_t segs = std::clamp<std::size_t>(segments, 1, index.bank.size());
    const auto matches = segmented_retrieve(query, index.bank, proj, segs, k);

    std::unordered_map<std::string, const ChunkMeta*> by_id;
    by_id.reserve(index.chunks.size());
    for (const auto& chunk : index.chunks) by_id.emplace(chunk.id, &chunk);

    std::vector<RetrievalResult> results;
    results.reserve(matches.size());
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const auto it = by_id.find(matches[i].id);
        if (it == by_id.end()) {
            throw Error(ErrorCode::CorruptIndex,
                        "bank id '" + matches[i].id + "' missing from chunk table");
        }
        results.push_back({matches[i].id, matches[i].score, it->second->text, i + 1});
    }
    return results;
}

void save_index(const Index& index, const std::string& path) {
    nlohmann::json chunk_table = nlohmann::json::array();
    for (const auto& chunk : index.chunks) {
        chunk_table.push_back({{"id", chunk.id},
                               {"doc_id", chunk.doc_id},
                               {"span", {chunk.token_start, chunk.token_end}},
                               {"text", chunk.text}});
    }
    nlohmann::json header = {{"dim", index.dim},
                             {"provider", index.provider},
                             {"quantized", index.quantized},
                             {"chunk_count", index.chunks.size()},
                             {"chunks", std::move(chunk_table)}};
    const std::string header_str = header.dump();

    std::string buf;
    buf.append(kMagic, 4);
    buf.push_back(static_cast<char>(kVersion));
    put_u32(buf, static_cast<std::uint32_t>(header_str.size()));
    buf += header_str;

    const std::size_t n = index.bank.size();
    if (index.quantized) {
        for (std::size_t i = 0; i < n; ++i) {
            const QuantizedVector& q = index.qrows[i];
            put_f32(buf, q.scale);
            buf.append(reinterpret_cast<const char*>(q.values.data()), q.values.size());
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = index.bank.patterns.row(i);
            for (std::size_t c = 0; c < index.dim; ++c) {
                put_f32(buf, static_cast<float>(row[c]));
            }
        }
    }
    put_u32(buf, crc_of(buf, buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(buf.data(), static_cast<std::streamsize>(buf.size()))) {
        throw Error(ErrorCode::IoError, "cannot write index file: " + path);
    }
}

Index load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open index file: " + path);
    }
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 13) {
        throw Error(ErrorCode::CorruptIndex, "index file truncated");
    }
    if (std::memcmp(buf.data(), kMagic, 4) != 0 ||
        static_cast<std::uint8_t>(buf[4]) != kVersion) {
        throw Error(ErrorCode::UnsupportedIndexVersion,
                    "unrecognized index magic or version");
    }
    const std::uint32_t stored_crc = get_u32(buf, buf.size() - 4);
    if (crc_of(buf, buf.size() - 4) != stored_crc) {
        throw Error(ErrorCode::CorruptIndex, "index checksum mismatch");
    }

    const std::uint32_t header_len = get_u32(buf, 5);
    std::size_t pos = 9;
    if (pos + header_len + 4 > buf.size()) {
        throw Error(ErrorCode::CorruptIndex, "index header overruns file");
    }
    nlohmann::json header =
        nlohmann::json::parse(buf.substr(pos, header_len), nullptr, false);
    if (header.is_discarded()) {
        throw Error(ErrorCode::CorruptIndex, "index header is not valid JSON");
    }
    pos += header_len;

    Index index;
    index.dim = header.at("dim").get<std::size_t>();
    index.provider = header.at("provider").get<std::string>();
    index.quantized = header.at("quantized").get<bool>();
    const std::size_t n = header.at("chunk_count").get<std::size_t>();
    for (const auto& c : header.at("chunks")) {
        index.chunks.push_back({c.at("id").get<std::string>(),
                                c.at("doc_id").get<std::string>(),
                                c.at("span")[0].get<std::size_t>(),
                                c.at("span")[1].get<std::size_t>(),
                                c.at("text").get<std::string>()});
    }
    if (index.chunks.size() != n) {
        throw Error(ErrorCode::CorruptIndex, "chunk table size disagrees with chunk_count");
    }

    const std::size_t row_bytes = index.quantized ? 4 + index.dim : 4 * index.dim;
    if (pos + n * row_bytes + 4 != buf.size()) {
        throw Error(ErrorCode::CorruptIndex, "vector block size mismatch");
    }

    Matrix patterns(n, index.dim);
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back(index.chunks[i].id);
        if (index.quantized) {
            QuantizedVector q;
            q.scale = get_f32(buf, pos);
            pos += 4;
            q.values.resize(index.dim);
            std::memcpy(q.values.data(), buf.data() + pos, index.dim);
            pos += index.dim;
            const Vec deq = dequantize(q);
            std::copy(deq.begin(), deq.end(), patterns.row(i));
            index.qrows.push_back(std::move(q));
        } else {
            for (std::size_t c = 0; c < index.dim; ++c) {
                patterns.at(i, c) = static_cast<double>(get_f32(buf, pos));
                pos += 4;
            }
        }
    }
    index.bank = MemoryBank(std::move(patterns), std::move(ids));
    return index;
}

std::vector<Document> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open corpus file: " + path);
    }
    std::vector<Document> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("id") || !j.contains("text")) {
            throw Error(ErrorCode::InvalidValue,
                        "corpus file line " + std::to_string(lineno) + " malformed");
        }
        Document doc;
        doc.id = j["id"].get<std::string>();
        doc.title = j.value("title", "");
        doc.text = j["text"].get<std::string>();
        doc.source = j.value("source", path);
        docs.push_back(std::move(doc));
    }
    return docs;
}

} // namespace ccoa
