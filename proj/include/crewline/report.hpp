#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crewline/stages.hpp"

namespace crewline::report {

struct YearMonth {
    int year = 0;
    int month = 0;

    static YearMonth parse(const std::string& text);  // "YYYY-MM"
    bool contains(const ingest::Date& d) const { return d.year == year && d.month == month; }
    std::string str() const;
    auto operator<=>(const YearMonth&) const = default;
};

/// Region with alias set; matching is normalized diacritic-folded
/// substring containment.
struct Region {
    std::string name;
    std::vector<std::string> aliases;
};

struct Gazetteer {
    std::vector<Region> regions;

    /// First region whose name or alias matches the location string.
    std::optional<std::string> resolve(const std::string& location) const;

    static Gazetteer default_french_regions();
    static Gazetteer from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

struct CompanyRow {
    std::string name;
    std::optional<std::string> siren;
    std::size_t count = 0;
};

struct Report {
    YearMonth month;
    std::string focus_category;
    std::map<std::string, std::size_t> category_counts;
    std::map<std::string, std::size_t> geo;
    std::size_t unlocated = 0;
    std::vector<std::string> focus_events;  // event ids
    std::vector<CompanyRow> companies;      // sorted (count desc, name asc)
};

enum class ReportFormat { json, csv_bundle, markdown };

struct DateRange {
    std::optional<ingest::Date> start;
    std::optional<ingest::Date> end;
};

/// Counts in-month events keyed by category name ("Uncategorized" for
/// events without one).
std::map<std::string, std::size_t> category_counts(
    const std::vector<stages::EnrichedEvent>& events, const YearMonth& month);

/// Region counts for in-category events; events with no resolvable region
/// land in the returned unlocated count.
std::pair<std::map<std::string, std::size_t>, std::size_t> geo_density(
    const std::vector<stages::EnrichedEvent>& events, const std::string& category,
    const Gazetteer& gazetteer);

/// Stable-order conjunctive filter. An inverted range yields nothing.
std::vector<stages::EnrichedEvent> filter_events(
    const std::vector<stages::EnrichedEvent>& events, const std::string& category,
    const DateRange& range);

std::vector<CompanyRow> companies_for_category(
    const std::vector<stages::EnrichedEvent>& events, const std::string& category);

Report build_report(const std::vector<stages::EnrichedEvent>& events, const YearMonth& month,
                    const std::string& focus_category, const Gazetteer& gazetteer);

nlohmann::ordered_json report_to_json(const Report& report);

/// Writes canonical report files under `out_dir`; identical reports yield
/// byte-identical files. Returns the paths written.
std::vector<std::string> render_report(const Report& report, ReportFormat format,
                                       const std::string& out_dir);

std::string category_of(const stages::EnrichedEvent& event);

}  // namespace crewline::report
