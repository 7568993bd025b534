#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "crewline/errors.hpp"

namespace crewline::retrieval {

inline constexpr double kBm25K1 = 1.2;
inline constexpr double kBm25B = 0.75;
inline constexpr std::size_t kDefaultChunkTokens = 256;
inline constexpr std::size_t kDefaultChunkOverlap = 32;

/// Identifies a chunk within a corpus; ordering is (doc_id, ordinal).
struct ChunkRef {
    std::string doc_id;
    std::size_t ordinal = 0;

    auto operator<=>(const ChunkRef&) const = default;
    std::string str() const { return doc_id + "#" + std::to_string(ordinal); }
};

struct Chunk {
    std::string doc_id;
    std::size_t ordinal = 0;
    std::string text;
    std::size_t token_count = 0;

    ChunkRef ref() const { return ChunkRef{doc_id, ordinal}; }
};

struct Hit {
    ChunkRef chunk;
    double score = 0.0;
};

/// Token with its byte span in the source text.
struct TokenSpan {
    std::string token;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Lowercases, folds diacritics to ASCII, and splits on anything that is
/// not an ASCII letter or digit after folding.
std::vector<std::string> tokenize(std::string_view text);
std::vector<TokenSpan> tokenize_with_spans(std::string_view text);

/// Sliding-window chunking over token spans: consecutive chunks share
/// exactly `overlap` tokens (the last chunk may be shorter).
std::vector<Chunk> chunk(const std::string& doc_id, std::string_view text,
                         std::size_t max_tokens = kDefaultChunkTokens,
                         std::size_t overlap = kDefaultChunkOverlap);

class Index {
public:
    struct Posting {
        std::size_t chunk = 0;  // index into chunk refs
        std::uint32_t tf = 0;
    };

    static Index build(const std::vector<Chunk>& chunks);

    /// BM25 with a non-negative IDF floor. At most k hits, sorted by
    /// (score desc, chunk ref asc). Empty query yields an empty list.
    std::vector<Hit> retrieve(const std::string& query, std::size_t k) const;

    std::size_t chunk_count() const { return doc_lengths_.size(); }
    double avg_len() const { return avg_len_; }
    const std::vector<ChunkRef>& chunk_refs() const { return refs_; }
    const std::vector<std::string>& chunk_texts() const { return texts_; }
    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
    const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }

    /// Canonical single-file form: equal corpora serialize byte-equal.
    std::string serialize() const;
    static Index deserialize(const std::string& bytes);

private:
    std::map<std::string, std::vector<Posting>> postings_;  // term -> sorted postings
    std::vector<ChunkRef> refs_;                            // sorted ascending
    std::vector<std::string> texts_;                        // parallel to refs_
    std::vector<std::uint32_t> doc_lengths_;                // parallel to refs_
    double avg_len_ = 0.0;
};

}  // namespace crewline::retrieval
