#include "crewline/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "crewline/textutil.hpp"

namespace crewline::retrieval {

std::vector<TokenSpan> tokenize_with_spans(std::string_view text_in) {
    std::vector<TokenSpan> out;
    std::string current;
    std::size_t tok_begin = 0;
    std::size_t pos = 0;
    auto flush = [&](std::size_t end) {
        if (!current.empty()) {
            out.push_back(TokenSpan{current, tok_begin, end});
            current.clear();
        }
    };
    while (pos < text_in.size()) {
        std::size_t start = pos;
        char32_t cp = text::decode_utf8(text_in, pos);
        std::string folded = text::fold_to_ascii(cp);
        bool is_word = false;
        for (char c : folded) {
            if (text::is_ascii_alnum(static_cast<unsigned char>(c))) {
                is_word = true;
            }
        }
        if (is_word) {
            if (current.empty()) {
                tok_begin = start;
            }
            for (char c : folded) {
                if (text::is_ascii_alnum(static_cast<unsigned char>(c))) {
                    current.push_back(
                        static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
                }
            }
        } else {
            flush(start);
        }
    }
    flush(text_in.size());
    return out;
}

std::vector<std::string> tokenize(std::string_view text_in) {
    std::vector<std::string> out;
    for (auto& span : tokenize_with_spans(text_in)) {
        out.push_back(std::move(span.token));
    }
    return out;
}

std::vector<Chunk> chunk(const std::string& doc_id, std::string_view text_in,
                         std::size_t max_tokens, std::size_t overlap) {
    if (max_tokens < 1 || overlap >= max_tokens) {
        throw BadParams("chunk: require max_tokens >= 1 and overlap < max_tokens");
    }
    auto spans = tokenize_with_spans(text_in);
    std::vector<Chunk> chunks;
    if (spans.empty()) {
        return chunks;
    }
    std::size_t start = 0;
    while (true) {
        std::size_t end = std::min(start + max_tokens, spans.size());
        Chunk c;
        c.doc_id = doc_id;
        c.ordinal = chunks.size();
        c.text = std::string(
            text_in.substr(spans[start].begin, spans[end - 1].end - spans[start].begin));
        c.token_count = end - start;
        chunks.push_back(std::move(c));
        if (end == spans.size()) {
            break;
        }
        start = end - overlap;
    }
    return chunks;
}

Index Index::build(const std::vector<Chunk>& chunks) {
    Index idx;
    std::vector<std::size_t> order(chunks.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return chunks[a].ref() < chunks[b].ref();
    });
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        if (chunks[order[i]].ref() == chunks[order[i + 1]].ref()) {
            throw DuplicateChunk("duplicate chunk ref: " + chunks[order[i]].ref().str());
        }
    }

    std::uint64_t total_len = 0;
    for (std::size_t slot = 0; slot < order.size(); ++slot) {
        const Chunk& c = chunks[order[slot]];
        idx.refs_.push_back(c.ref());
        idx.texts_.push_back(c.text);
        auto tokens = tokenize(c.text);
        idx.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        total_len += tokens.size();
        std::map<std::string, std::uint32_t> tf;
        for (const auto& t : tokens) {
            ++tf[t];
        }
        for (const auto& [term, freq] : tf) {
            idx.postings_[term].push_back(Posting{slot, freq});
        }
    }
    idx.avg_len_ = idx.refs_.empty() ? 0.0
                                     : static_cast<double>(total_len) /
                                           static_cast<double>(idx.refs_.size());
    return idx;
}

std::vector<Hit> Index::retrieve(const std::string& query, std::size_t k) const {
    std::vector<Hit> hits;
    if (refs_.empty() || k == 0) {
        return hits;
    }
    auto terms = tokenize(query);
    if (terms.empty()) {
        return hits;
    }
    const double n = static_cast<double>(refs_.size());
    std::vector<double> scores(refs_.size(), 0.0);
    std::vector<bool> touched(refs_.size(), false);
    for (const auto& term : terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) {
            continue;
        }
        const auto& plist = it->second;
        double df = static_cast<double>(plist.size());
        double idf = std::max(0.0, std::log((n - df + 0.5) / (df + 0.5)));
        for (const auto& p : plist) {
            double tf = static_cast<double>(p.tf);
            double dl = static_cast<double>(doc_lengths_[p.chunk]);
            double norm = tf + kBm25K1 * (1.0 - kBm25B + kBm25B * dl / avg_len_);
            scores[p.chunk] += idf * tf * (kBm25K1 + 1.0) / norm;
            touched[p.chunk] = true;
        }
    }
    for (std::size_t i = 0; i < refs_.size(); ++i) {
        if (touched[i] && scores[i] > 0.0) {
            hits.push_back(Hit{refs_[i], scores[i]});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.chunk < b.chunk;
    });
    if (hits.size() > k) {
        hits.resize(k);
    }
    return hits;
}

std::string Index::serialize() const {
    nlohmann::json doc;
    doc["version"] = 1;
    nlohmann::json chunks = nlohmann::json::array();
    for (std::size_t i = 0; i < refs_.size(); ++i) {
        chunks.push_back({{"doc_id", refs_[i].doc_id},
                          {"ordinal", refs_[i].ordinal},
                          {"text", texts_[i]}});
    }
    doc["chunks"] = std::move(chunks);
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [term, plist] : postings_) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : plist) {
            arr.push_back({p.chunk, p.tf});
        }
        postings[term] = std::move(arr);
    }
    doc["postings"] = std::move(postings);
    return doc.dump();
}

Index Index::deserialize(const std::string& bytes) {
    nlohmann::json doc = nlohmann::json::parse(bytes);
    if (!doc.contains("version") || doc["version"].get<int>() != 1) {
        throw Error("unsupported index version");
    }
    std::vector<Chunk> chunks;
    for (const auto& c : doc["chunks"]) {
        Chunk chk;
        chk.doc_id = c["doc_id"].get<std::string>();
        chk.ordinal = c["ordinal"].get<std::size_t>();
        chk.text = c["text"].get<std::string>();
        chk.token_count = tokenize(chk.text).size();
        chunks.push_back(std::move(chk));
    }
    return build(chunks);
}

}  // namespace crewline::retrieval
