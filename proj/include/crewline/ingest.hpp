#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crewline/errors.hpp"

namespace crewline::ingest {

/// Calendar date, validated on construction.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    static bool valid(int y, int m, int d);
    std::string iso() const;  // YYYY-MM-DD
    auto operator<=>(const Date&) const = default;
};

/// Euro amount held as exact integer cents.
struct MoneyAmount {
    std::int64_t minor_units = 0;  // cents, non-negative
    std::string currency = "EUR";

    bool operator==(const MoneyAmount&) const = default;
};

struct NewsArticle {
    std::string id;  // file stem + "-" + 0-based record ordinal
    Date date;
    std::string body;  // non-empty, trimmed

    bool operator==(const NewsArticle&) const = default;
};

struct CompanyRecord {
    std::string siren;  // exactly 9 decimal digits
    std::string name;
    std::string hq_address;
    std::optional<std::string> phone;
    std::optional<std::string> employees;  // verbatim, e.g. "50 to 99"

    bool operator==(const CompanyRecord&) const = default;
};

struct FinancialRecord {
    std::string company_name;
    std::optional<MoneyAmount> turnover;
    int fiscal_year = 0;  // in [1900, 2200]

    bool operator==(const FinancialRecord&) const = default;
};

struct ReviewRecord {
    std::string company_name;
    std::string text;

    bool operator==(const ReviewRecord&) const = default;
};

/// Parses `M/D/YYYY` month-first, falling back to day-first only when the
/// month-first reading is invalid. ISO `YYYY-MM-DD` passes through.
Date parse_date(const std::string& text);

/// Parses euro amounts such as "€15.47 B", "€17,569 M", "€18.1 million".
/// "-" and empty strings mean absent. Throws UnparsableMoney when a
/// non-empty string matches no pattern or does not land on whole cents.
std::optional<MoneyAmount> parse_money(const std::string& text);

/// Canonical money rendering: "€<euros>.<cc>", no separators. Reparsing
/// the result always recovers the same minor_units.
std::string format_money(const MoneyAmount& amount);

/// News corpus: blank-line-separated blocks of `DATE; body`. The body may
/// continue on following lines within the block.
std::vector<NewsArticle> load_news(const std::string& path);
std::vector<NewsArticle> parse_news(const std::string& content, const std::string& file_stem);

/// Writes articles back in the news file format (dates as ISO).
std::string format_news(const std::vector<NewsArticle>& articles);

/// CSV with header `siren,name,hq_address,phone,employees` (any column
/// order). "-" and empty cells become absent optionals.
std::vector<CompanyRecord> load_company_records(const std::string& path);
std::vector<CompanyRecord> parse_company_records(const std::string& content);

/// CSV with header `company_name,turnover,fiscal_year`.
std::vector<FinancialRecord> load_financial_records(const std::string& path);
std::vector<FinancialRecord> parse_financial_records(const std::string& content);

/// Sectioned text: `## <CompanyName>` opens a section, `- <text>` lines
/// are reviews attached to it.
std::vector<ReviewRecord> load_reviews(const std::string& path);
std::vector<ReviewRecord> parse_reviews(const std::string& content);

/// Best-effort HTML to text: drops script/style, strips tags, decodes
/// entities, collapses whitespace.
std::string load_html_text(const std::string& path);
std::string html_to_text(const std::string& html);

/// RFC-4180-style CSV row parsing shared by the table loaders.
std::vector<std::vector<std::string>> parse_csv(const std::string& content);

std::string read_file(const std::string& path);
std::string file_stem(const std::string& path);

}  // namespace crewline::ingest
