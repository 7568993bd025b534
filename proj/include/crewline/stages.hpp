#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crewline/crew.hpp"
#include "crewline/ingest.hpp"
#include "crewline/llm.hpp"
#include "crewline/retrieval.hpp"

namespace crewline::stages {

struct BusinessEvent {
    std::string id;          // article_id + "-e" + per-article ordinal
    std::string article_id;
    ingest::Date date;
    std::string summary;
    std::vector<std::string> companies;  // non-empty, or the event is rejected
    std::vector<std::string> persons;
    std::vector<std::string> locations;
    std::vector<ingest::MoneyAmount> amounts;
    std::string context;  // free-form topic hint

    bool operator==(const BusinessEvent&) const = default;
};

struct CompanyLink {
    std::string mention;
    std::optional<std::string> siren;
    std::optional<ingest::CompanyRecord> profile;   // present iff siren present
    std::optional<ingest::FinancialRecord> financial;
    std::vector<std::pair<std::string, double>> review_snippets;
    double match_score = 0.0;
};

struct EnrichedEvent {
    BusinessEvent event;  // byte-equal copy of the source event
    std::vector<CompanyLink> links;
    std::optional<std::string> category;
};

/// Closed category set plus the "Uncategorized" sentinel, with per-category
/// keyword lists for the classification fallback.
struct Taxonomy {
    std::vector<std::string> names;  // in configuration order
    std::map<std::string, std::vector<std::string>> keywords;

    static const std::string kUncategorized;

    /// Case-insensitive membership; returns the canonical name.
    std::optional<std::string> member(const std::string& name) const;

    static Taxonomy default_taxonomy();
    static Taxonomy from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

struct ValidationIssue {
    std::string reason;
    nlohmann::json payload;
};

struct ValidationReport {
    std::vector<ValidationIssue> dropped;
    std::string to_jsonl() const;
};

struct PipelineConfig {
    std::size_t batch_size = 5;
    double link_threshold = 0.90;
    std::size_t chunk_max_tokens = retrieval::kDefaultChunkTokens;
    std::size_t chunk_overlap = retrieval::kDefaultChunkOverlap;
    std::size_t snippet_k = 3;
};

struct PipelineData {
    std::vector<ingest::NewsArticle> articles;
    std::vector<ingest::CompanyRecord> companies;
    std::vector<ingest::FinancialRecord> financials;
    std::vector<ingest::ReviewRecord> reviews;
};

/// Uppercases, folds diacritics, drops parenthesized segments and trailing
/// legal-form suffixes (SA, SAS, SARL, GMBH, INC, LTD). Idempotent; an
/// empty result never matches anything.
std::string normalize_company_name(const std::string& name);

/// Jaro-Winkler similarity in [0,1] with the standard 0.1 prefix weight.
double jaro_winkler(const std::string& a, const std::string& b);

/// Exact normalized-key matches score 1.0 and always win; otherwise the
/// best Jaro-Winkler candidate at or above `threshold`. Ties break by
/// higher score, then lexicographically smallest SIREN.
std::optional<std::pair<ingest::CompanyRecord, double>> link_entity(
    const std::string& mention, const std::vector<ingest::CompanyRecord>& companies,
    double threshold);

/// One chunk stream per review; doc_id = normalized company key + "/" +
/// review ordinal, so snippet hits can be filtered back to their company.
retrieval::Index build_reviews_index(const std::vector<ingest::ReviewRecord>& reviews,
                                     std::size_t max_tokens = retrieval::kDefaultChunkTokens,
                                     std::size_t overlap = retrieval::kDefaultChunkOverlap);

/// Prompts articles in batches of at most `batch_size` and validates the
/// returned event objects. Events with unknown article ids or no company
/// are dropped into `report`; ids are assigned per article in order.
std::vector<BusinessEvent> crawl_events(const std::vector<ingest::NewsArticle>& articles,
                                        llm::Gateway& gateway, const crew::Agent& agent,
                                        const crew::Task& task, std::size_t batch_size,
                                        ValidationReport& report);

/// Deterministic multi-source join; never fails, absent data stays absent.
EnrichedEvent enrich_event(const BusinessEvent& event,
                           const std::vector<ingest::CompanyRecord>& companies,
                           const std::vector<ingest::FinancialRecord>& financials,
                           const retrieval::Index& reviews_index, std::size_t k,
                           double threshold);

/// Closed-taxonomy classification: the model must answer with one taxonomy
/// name; otherwise keyword fallback, otherwise "Uncategorized".
std::string classify_event(const EnrichedEvent& enriched, const Taxonomy& taxonomy,
                           llm::Gateway& gateway, const crew::Agent& agent);

/// The three-agent crew mirroring the sequential extraction process, with
/// the default role/goal/backstory strings.
crew::Crew default_crew();

/// load -> crawl -> enrich -> classify, composed through run_crew. Output
/// order is article order, then per-article event ordinal.
std::vector<EnrichedEvent> run_pipeline(const PipelineData& data, const crew::Crew& crew_def,
                                        llm::Gateway& gateway, const PipelineConfig& config,
                                        const Taxonomy& taxonomy, ValidationReport& report);

// Canonical JSON forms (fixed field order, ISO dates, money as cents).
nlohmann::ordered_json money_to_json(const ingest::MoneyAmount& m);
ingest::MoneyAmount money_from_json(const nlohmann::json& j);
nlohmann::ordered_json event_to_json(const BusinessEvent& e);
BusinessEvent event_from_json(const nlohmann::json& j);
nlohmann::ordered_json enriched_to_json(const EnrichedEvent& e);
EnrichedEvent enriched_from_json(const nlohmann::json& j);

std::string events_to_jsonl(const std::vector<BusinessEvent>& events);
std::vector<BusinessEvent> events_from_jsonl(const std::string& content);
std::string enriched_to_jsonl(const std::vector<EnrichedEvent>& events);
std::vector<EnrichedEvent> enriched_from_jsonl(const std::string& content);

}  // namespace crewline::stages
