#include "crewline/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "crewline/textutil.hpp"

namespace crewline::ingest {

namespace {

bool is_blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(),
                                     [](unsigned char c) { return std::isdigit(c); });
}

std::optional<std::string> cell_or_absent(const std::string& raw) {
    std::string v = text::trim(raw);
    if (v.empty() || v == "-") {
        return std::nullopt;
    }
    return v;
}

}  // namespace

bool Date::valid(int y, int m, int d) {
    if (y < 1 || m < 1 || m > 12 || d < 1) {
        return false;
    }
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int max_day = days[m - 1];
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (m == 2 && leap) {
        max_day = 29;
    }
    return d <= max_day;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date parse_date(const std::string& text_in) {
    std::string s = text::trim(text_in);
    static const std::regex slash_re(R"(^(\d{1,2})/(\d{1,2})/(\d{4})$)");
    static const std::regex iso_re(R"(^(\d{4})-(\d{2})-(\d{2})$)");
    std::smatch m;
    if (std::regex_match(s, m, slash_re)) {
        int a = std::stoi(m[1]);
        int b = std::stoi(m[2]);
        int y = std::stoi(m[3]);
        if (Date::valid(y, a, b)) {
            return Date{y, a, b};  // month-first
        }
        if (Date::valid(y, b, a)) {
            return Date{y, b, a};  // day-first fallback
        }
        throw UnparsableDate(text_in);
    }
    if (std::regex_match(s, m, iso_re)) {
        int y = std::stoi(m[1]);
        int mo = std::stoi(m[2]);
        int d = std::stoi(m[3]);
        if (!Date::valid(y, mo, d)) {
            throw UnparsableDate(text_in);
        }
        return Date{y, mo, d};
    }
    throw UnparsableDate(text_in);
}

std::optional<MoneyAmount> parse_money(const std::string& text_in) {
    std::string s = text::trim(text_in);
    if (s.empty() || s == "-") {
        return std::nullopt;
    }
    static const std::regex money_re(
        R"(^(?:€\s*)?([0-9][0-9, ]*)(?:\.([0-9]+))?\s*(B|billion|M|million)?$)",
        std::regex::icase);
    std::smatch m;
    if (!std::regex_match(s, m, money_re)) {
        throw UnparsableMoney(text_in);
    }
    std::string int_part = m[1];
    int_part.erase(std::remove_if(int_part.begin(), int_part.end(),
                                  [](char c) { return c == ',' || c == ' '; }),
                   int_part.end());
    std::string frac = m[2];
    std::string suffix = m[3];
    int scale_pow = 0;
    if (!suffix.empty()) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(suffix[0])));
        scale_pow = (c == 'b') ? 9 : 6;
    }

    unsigned __int128 mantissa = 0;
    for (char c : int_part + frac) {
        mantissa = mantissa * 10 + static_cast<unsigned>(c - '0');
        if (mantissa > (unsigned __int128)1 << 100) {
            throw UnparsableMoney(text_in);
        }
    }
    int exp = scale_pow + 2 - static_cast<int>(frac.size());  // cents
    while (exp < 0) {
        if (mantissa % 10 != 0) {
            throw UnparsableMoney(text_in);  // not representable as whole cents
        }
        mantissa /= 10;
        ++exp;
    }
    for (int i = 0; i < exp; ++i) {
        mantissa *= 10;
    }
    if (mantissa > static_cast<unsigned __int128>(INT64_MAX)) {
        throw UnparsableMoney(text_in);
    }
    return MoneyAmount{static_cast<std::int64_t>(mantissa), "EUR"};
}

std::string format_money(const MoneyAmount& amount) {
    std::int64_t euros = amount.minor_units / 100;
    std::int64_t cents = amount.minor_units % 100;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "€%lld.%02lld", static_cast<long long>(euros),
                  static_cast<long long>(cents));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string file_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

std::vector<NewsArticle> parse_news(const std::string& content, const std::string& stem) {
    std::vector<NewsArticle> articles;
    auto lines = text::split_lines(content);

    std::vector<std::vector<std::string>> blocks;
    std::vector<std::string> current;
    for (const auto& line : lines) {
        if (is_blank(line)) {
            if (!current.empty()) {
                blocks.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(line);
        }
    }
    if (!current.empty()) {
        blocks.push_back(std::move(current));
    }

    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        std::string block;
        for (std::size_t li = 0; li < blocks[bi].size(); ++li) {
            if (li > 0) {
                block += '\n';
            }
            block += blocks[bi][li];
        }
        auto semi = block.find(';');
        if (semi == std::string::npos) {
            throw MalformedRecord(bi, "missing 'DATE;' header");
        }
        Date date;
        try {
            date = parse_date(block.substr(0, semi));
        } catch (const UnparsableDate&) {
            throw MalformedRecord(bi, "header is not a date: '" + block.substr(0, semi) + "'");
        }
        std::string body = text::trim(block.substr(semi + 1));
        if (body.empty()) {
            throw MalformedRecord(bi, "empty body");
        }
        NewsArticle a;
        a.id = stem + "-" + std::to_string(articles.size());
        a.date = date;
        a.body = body;
        articles.push_back(std::move(a));
    }
    return articles;
}

std::vector<NewsArticle> load_news(const std::string& path) {
    return parse_news(read_file(path), file_stem(path));
}

std::string format_news(const std::vector<NewsArticle>& articles) {
    std::string out;
    for (std::size_t i = 0; i < articles.size(); ++i) {
        if (i > 0) {
            out += "\n";
        }
        out += articles[i].date.iso() + "; " + articles[i].body + "\n";
    }
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_field = [&] {
        row.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        bool empty_row = row.size() == 1 && row[0].empty();
        if (!empty_row) {
            rows.push_back(row);
        }
        row.clear();
    };
    while (i < content.size()) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') {
                field.pop_back();
            }
            end_row();
        } else {
            field += c;
            field_started = true;
        }
        ++i;
    }
    if (field_started || !row.empty() || !field.empty()) {
        if (!field.empty() && field.back() == '\r') {
            field.pop_back();
        }
        end_row();
    }
    return rows;
}

namespace {

std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header,
                                                const std::vector<std::string>& required) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < header.size(); ++i) {
        idx[text::fold_lower(text::trim(header[i]))] = i;
    }
    for (const auto& col : required) {
        if (!idx.count(col)) {
            throw HeaderMismatch("missing required column '" + col + "'");
        }
    }
    return idx;
}

std::string cell(const std::vector<std::string>& row, std::size_t i) {
    return i < row.size() ? text::trim(row[i]) : std::string();
}

}  // namespace

std::vector<CompanyRecord> parse_company_records(const std::string& content) {
    auto rows = parse_csv(content);
    if (rows.empty()) {
        throw HeaderMismatch("empty file, header row required");
    }
    auto idx = header_index(rows[0], {"siren", "name", "hq_address", "phone", "employees"});
    std::vector<CompanyRecord> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        CompanyRecord rec;
        rec.siren = cell(rows[r], idx["siren"]);
        if (rec.siren.size() != 9 || !all_digits(rec.siren)) {
            throw BadSiren(r, rec.siren);
        }
        rec.name = cell(rows[r], idx["name"]);
        if (rec.name.empty()) {
            throw MalformedRecord(r, "empty company name");
        }
        rec.hq_address = cell(rows[r], idx["hq_address"]);
        rec.phone = cell_or_absent(cell(rows[r], idx["phone"]));
        rec.employees = cell_or_absent(cell(rows[r], idx["employees"]));
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<CompanyRecord> load_company_records(const std::string& path) {
    return parse_company_records(read_file(path));
}

std::vector<FinancialRecord> parse_financial_records(const std::string& content) {
    auto rows = parse_csv(content);
    if (rows.empty()) {
        throw HeaderMismatch("empty file, header row required");
    }
    auto idx = header_index(rows[0], {"company_name", "turnover", "fiscal_year"});
    std::vector<FinancialRecord> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        FinancialRecord rec;
        rec.company_name = cell(rows[r], idx["company_name"]);
        if (rec.company_name.empty()) {
            throw MalformedRecord(r, "empty company name");
        }
        rec.turnover = parse_money(cell(rows[r], idx["turnover"]));
        std::string year = cell(rows[r], idx["fiscal_year"]);
        if (!all_digits(year)) {
            throw MalformedRecord(r, "bad fiscal year '" + year + "'");
        }
        rec.fiscal_year = std::stoi(year);
        if (rec.fiscal_year < 1900 || rec.fiscal_year > 2200) {
            throw MalformedRecord(r, "fiscal year out of range: " + year);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<FinancialRecord> load_financial_records(const std::string& path) {
    return parse_financial_records(read_file(path));
}

std::vector<ReviewRecord> parse_reviews(const std::string& content) {
    std::vector<ReviewRecord> records;
    std::string current_company;
    auto lines = text::split_lines(content);
    for (const auto& raw : lines) {
        std::string line = text::trim(raw);
        if (line.rfind("## ", 0) == 0) {
            current_company = text::trim(line.substr(3));
        } else if (line.rfind("- ", 0) == 0) {
            std::string body = text::trim(line.substr(2));
            if (body.empty()) {
                continue;
            }
            if (current_company.empty()) {
                throw OrphanReview("review before any company heading: '" + body + "'");
            }
            records.push_back(ReviewRecord{current_company, body});
        }
        // anything else is ignored
    }
    return records;
}

std::vector<ReviewRecord> load_reviews(const std::string& path) {
    return parse_reviews(read_file(path));
}

namespace {

// Case-insensitive search for `needle` (ASCII) in `hay` starting at `from`.
std::size_t ifind(const std::string& hay, const std::string& needle, std::size_t from) {
    auto it = std::search(hay.begin() + static_cast<std::ptrdiff_t>(from), hay.end(),
                          needle.begin(), needle.end(), [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                          });
    return it == hay.end() ? std::string::npos
                           : static_cast<std::size_t>(it - hay.begin());
}

void append_codepoint(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

std::string decode_entities(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out += s[i++];
            continue;
        }
        auto semi = s.find(';', i);
        if (semi == std::string::npos || semi - i > 10) {
            out += s[i++];
            continue;
        }
        std::string name = s.substr(i + 1, semi - i - 1);
        if (name == "amp") {
            out += '&';
        } else if (name == "lt") {
            out += '<';
        } else if (name == "gt") {
            out += '>';
        } else if (name == "quot") {
            out += '"';
        } else if (name == "apos") {
            out += '\'';
        } else if (name == "nbsp") {
            out += ' ';
        } else if (!name.empty() && name[0] == '#') {
            try {
                char32_t cp;
                if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
                    cp = static_cast<char32_t>(std::stoul(name.substr(2), nullptr, 16));
                } else {
                    cp = static_cast<char32_t>(std::stoul(name.substr(1)));
                }
                append_codepoint(out, cp);
            } catch (const std::exception&) {
                out += s.substr(i, semi - i + 1);
            }
        } else {
            out += s.substr(i, semi - i + 1);  // unknown entity, keep verbatim
            i = semi + 1;
            continue;
        }
        i = semi + 1;
    }
    return out;
}

}  // namespace

std::string html_to_text(const std::string& html) {
    std::string stripped;
    stripped.reserve(html.size());
    std::size_t i = 0;
    while (i < html.size()) {
        if (html[i] != '<') {
            stripped += html[i++];
            continue;
        }
        // comments
        if (html.compare(i, 4, "<!--") == 0) {
            auto close = html.find("-->", i + 4);
            i = close == std::string::npos ? html.size() : close + 3;
            stripped += ' ';
            continue;
        }
        // script/style bodies drop entirely
        bool dropped = false;
        for (const std::string elem : {"script", "style"}) {
            if (ifind(html, "<" + elem, i) == i) {
                auto open_end = html.find('>', i);
                if (open_end == std::string::npos) {
                    i = html.size();
                    dropped = true;
                    break;
                }
                auto close = ifind(html, "</" + elem, open_end);
                if (close == std::string::npos) {
                    i = html.size();
                } else {
                    auto close_end = html.find('>', close);
                    i = close_end == std::string::npos ? html.size() : close_end + 1;
                }
                stripped += ' ';
                dropped = true;
                break;
            }
        }
        if (dropped) {
            continue;
        }
        auto close = html.find('>', i);
        i = close == std::string::npos ? html.size() : close + 1;
        stripped += ' ';
    }
    std::string decoded = decode_entities(stripped);
    // decoded &lt;/&gt; would reintroduce angle brackets; the output contract
    // is plain text with none, so they become spaces too
    for (char& c : decoded) {
        if (c == '<' || c == '>') {
            c = ' ';
        }
    }
    return text::collapse_ws(decoded);
}

std::string load_html_text(const std::string& path) {
    return html_to_text(read_file(path));
}

}  // namespace crewline::ingest
