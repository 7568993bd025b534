#include "crewline/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>

#include "crewline/textutil.hpp"

namespace crewline::report {

YearMonth YearMonth::parse(const std::string& text_in) {
    static const std::regex re(R"(^(\d{4})-(\d{2})$)");
    std::smatch m;
    std::string s = text::trim(text_in);
    if (!std::regex_match(s, m, re)) {
        throw ConfigError("bad month '" + text_in + "', expected YYYY-MM");
    }
    YearMonth ym{std::stoi(m[1]), std::stoi(m[2])};
    if (ym.month < 1 || ym.month > 12) {
        throw ConfigError("bad month '" + text_in + "'");
    }
    return ym;
}

std::string YearMonth::str() const {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

namespace {

// alias-matching key: folded, lowercased, punctuation to spaces
std::string geo_key(const std::string& s) {
    std::string folded = text::fold_lower(s);
    for (char& c : folded) {
        if (!text::is_ascii_alnum(static_cast<unsigned char>(c))) {
            c = ' ';
        }
    }
    return text::collapse_ws(folded);
}

}  // namespace

std::optional<std::string> Gazetteer::resolve(const std::string& location) const {
    std::string key = geo_key(location);
    if (key.empty()) {
        return std::nullopt;
    }
    for (const auto& region : regions) {
        std::vector<std::string> candidates = {region.name};
        candidates.insert(candidates.end(), region.aliases.begin(), region.aliases.end());
        for (const auto& candidate : candidates) {
            std::string ck = geo_key(candidate);
            if (!ck.empty() &&
                (key.find(ck) != std::string::npos || ck.find(key) != std::string::npos)) {
                return region.name;
            }
        }
    }
    return std::nullopt;
}

Gazetteer Gazetteer::default_french_regions() {
    Gazetteer g;
    g.regions = {
        {"Auvergne-Rhône-Alpes", {}},
        {"Bourgogne-Franche-Comté", {"Burgundy"}},
        {"Bretagne", {"Brittany"}},
        {"Centre-Val de Loire", {}},
        {"Corse", {"Corsica"}},
        {"Grand Est", {"Alsace", "Lorraine", "Champagne"}},
        {"Hauts-de-France", {"Picardy", "Picardie"}},
        {"Île-de-France", {"Paris region"}},
        {"Normandie", {"Normandy"}},
        {"Nouvelle-Aquitaine", {"Aquitaine"}},
        {"Occitanie", {"Occitania"}},
        {"Pays de la Loire", {}},
        {"Provence-Alpes-Côte d'Azur", {"PACA"}},
    };
    return g;
}

Gazetteer Gazetteer::from_json(const nlohmann::json& doc) {
    Gazetteer g;
    for (const auto& r : doc.at("regions")) {
        Region region;
        region.name = r.at("name").get<std::string>();
        if (r.contains("aliases")) {
            for (const auto& a : r["aliases"]) {
                region.aliases.push_back(a.get<std::string>());
            }
        }
        g.regions.push_back(std::move(region));
    }
    return g;
}

nlohmann::json Gazetteer::to_json() const {
    nlohmann::json doc;
    doc["regions"] = nlohmann::json::array();
    for (const auto& r : regions) {
        doc["regions"].push_back({{"name", r.name}, {"aliases", r.aliases}});
    }
    return doc;
}

std::string category_of(const stages::EnrichedEvent& event) {
    return event.category.value_or(stages::Taxonomy::kUncategorized);
}

std::map<std::string, std::size_t> category_counts(
    const std::vector<stages::EnrichedEvent>& events, const YearMonth& month) {
    std::map<std::string, std::size_t> counts;
    for (const auto& e : events) {
        if (month.contains(e.event.date)) {
            ++counts[category_of(e)];
        }
    }
    return counts;
}

std::pair<std::map<std::string, std::size_t>, std::size_t> geo_density(
    const std::vector<stages::EnrichedEvent>& events, const std::string& category,
    const Gazetteer& gazetteer) {
    std::map<std::string, std::size_t> regions;
    std::size_t unlocated = 0;
    for (const auto& e : events) {
        if (category_of(e) != category) {
            continue;
        }
        std::optional<std::string> region;
        for (const auto& location : e.event.locations) {
            region = gazetteer.resolve(location);
            if (region) {
                break;
            }
        }
        if (region) {
            ++regions[*region];
        } else {
            ++unlocated;
        }
    }
    return {regions, unlocated};
}

std::vector<stages::EnrichedEvent> filter_events(
    const std::vector<stages::EnrichedEvent>& events, const std::string& category,
    const DateRange& range) {
    std::vector<stages::EnrichedEvent> out;
    if (range.start && range.end && *range.end < *range.start) {
        return out;  // inverted range
    }
    for (const auto& e : events) {
        if (!category.empty() && category_of(e) != category) {
            continue;
        }
        if (range.start && e.event.date < *range.start) {
            continue;
        }
        if (range.end && *range.end < e.event.date) {
            continue;
        }
        out.push_back(e);
    }
    return out;
}

std::vector<CompanyRow> companies_for_category(
    const std::vector<stages::EnrichedEvent>& events, const std::string& category) {
    struct Acc {
        std::string name;
        std::optional<std::string> siren;
        std::size_t count = 0;
    };
    std::map<std::string, Acc> by_key;  // siren or normalized name
    for (const auto& e : events) {
        if (category_of(e) != category) {
            continue;
        }
        std::vector<std::string> seen;  // one count per event per company
        for (const auto& link : e.links) {
            std::string key = link.siren ? "s:" + *link.siren
                                         : "n:" + stages::normalize_company_name(link.mention);
            if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
                continue;
            }
            seen.push_back(key);
            auto& acc = by_key[key];
            if (acc.count == 0) {
                acc.name = link.profile ? link.profile->name : link.mention;
                acc.siren = link.siren;
            }
            ++acc.count;
        }
    }
    std::vector<CompanyRow> rows;
    for (const auto& [key, acc] : by_key) {
        rows.push_back(CompanyRow{acc.name, acc.siren, acc.count});
    }
    std::sort(rows.begin(), rows.end(), [](const CompanyRow& a, const CompanyRow& b) {
        if (a.count != b.count) {
            return a.count > b.count;
        }
        return a.name < b.name;
    });
    return rows;
}

Report build_report(const std::vector<stages::EnrichedEvent>& events, const YearMonth& month,
                    const std::string& focus_category, const Gazetteer& gazetteer) {
    Report r;
    r.month = month;
    r.focus_category = focus_category;
    r.category_counts = category_counts(events, month);

    std::vector<stages::EnrichedEvent> in_month;
    for (const auto& e : events) {
        if (month.contains(e.event.date)) {
            in_month.push_back(e);
        }
    }
    auto [geo, unlocated] = geo_density(in_month, focus_category, gazetteer);
    r.geo = std::move(geo);
    r.unlocated = unlocated;
    for (const auto& e : filter_events(in_month, focus_category, {})) {
        r.focus_events.push_back(e.event.id);
    }
    r.companies = companies_for_category(in_month, focus_category);
    return r;
}

nlohmann::ordered_json report_to_json(const Report& report) {
    nlohmann::ordered_json j;
    j["month"] = report.month.str();
    j["focus_category"] = report.focus_category;
    j["category_counts"] = nlohmann::ordered_json::object();
    for (const auto& [name, count] : report.category_counts) {
        j["category_counts"][name] = count;
    }
    j["geo"] = nlohmann::ordered_json::object();
    for (const auto& [name, count] : report.geo) {
        j["geo"][name] = count;
    }
    j["unlocated"] = report.unlocated;
    j["focus_events"] = report.focus_events;
    j["companies"] = nlohmann::ordered_json::array();
    for (const auto& row : report.companies) {
        nlohmann::ordered_json c;
        c["name"] = row.name;
        c["siren"] = row.siren ? nlohmann::ordered_json(*row.siren) : nullptr;
        c["count"] = row.count;
        j["companies"].push_back(std::move(c));
    }
    return j;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << content;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::vector<std::string> render_report(const Report& report, ReportFormat format,
                                       const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    auto path = [&](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    switch (format) {
        case ReportFormat::json: {
            std::string p = path("report.json");
            write_file(p, report_to_json(report).dump(2) + "\n");
            written.push_back(p);
            break;
        }
        case ReportFormat::csv_bundle: {
            std::string counts = "category,count\n";
            for (const auto& [name, count] : report.category_counts) {
                counts += csv_escape(name) + "," + std::to_string(count) + "\n";
            }
            std::string geo = "region,count\n";
            for (const auto& [name, count] : report.geo) {
                geo += csv_escape(name) + "," + std::to_string(count) + "\n";
            }
            geo += "unlocated," + std::to_string(report.unlocated) + "\n";
            std::string events = "event_id\n";
            for (const auto& id : report.focus_events) {
                events += csv_escape(id) + "\n";
            }
            std::string companies = "name,siren,count\n";
            for (const auto& row : report.companies) {
                companies += csv_escape(row.name) + "," + row.siren.value_or("") + "," +
                             std::to_string(row.count) + "\n";
            }
            for (const auto& [name, content] :
                 std::vector<std::pair<std::string, std::string>>{
                     {"report_category_counts.csv", counts},
                     {"report_geo.csv", geo},
                     {"report_focus_events.csv", events},
                     {"report_companies.csv", companies}}) {
                std::string p = path(name);
                write_file(p, content);
                written.push_back(p);
            }
            break;
        }
        case ReportFormat::markdown: {
            std::string md = "# Business events report, " + report.month.str() + "\n\n";
            md += "Focus category: " + report.focus_category + "\n\n";
            md += "## Events per category\n\n| Category | Count |\n|---|---|\n";
            for (const auto& [name, count] : report.category_counts) {
                md += "| " + name + " | " + std::to_string(count) + " |\n";
            }
            md += "\n## Geographic density (" + report.focus_category +
                  ")\n\n| Region | Count |\n|---|---|\n";
            for (const auto& [name, count] : report.geo) {
                md += "| " + name + " | " + std::to_string(count) + " |\n";
            }
            md += "| (unlocated) | " + std::to_string(report.unlocated) + " |\n";
            md += "\n## Focus events\n\n| Event id |\n|---|\n";
            for (const auto& id : report.focus_events) {
                md += "| " + id + " |\n";
            }
            md += "\n## Companies\n\n| Company | SIREN | Events |\n|---|---|---|\n";
            for (const auto& row : report.companies) {
                md += "| " + row.name + " | " + row.siren.value_or("-") + " | " +
                      std::to_string(row.count) + " |\n";
            }
            std::string p = path("report.md");
            write_file(p, md);
            written.push_back(p);
            break;
        }
    }
    return written;
}

}  // namespace crewline::report
