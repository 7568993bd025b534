#include "crewline/stages.hpp"

#include <algorithm>
#include <regex>

#include "crewline/textutil.hpp"

namespace crewline::stages {

const std::string Taxonomy::kUncategorized = "Uncategorized";

std::optional<std::string> Taxonomy::member(const std::string& name) const {
    std::string key = text::fold_lower(text::trim(name));
    for (const auto& n : names) {
        if (text::fold_lower(n) == key) {
            return n;
        }
    }
    return std::nullopt;
}

Taxonomy Taxonomy::default_taxonomy() {
    Taxonomy t;
    t.names = {"Urban Planning", "Renewable Energy", "Photovoltaic", "Fundraising",
               "Recruitment", "Acquisition",      "Agrivoltaics", "Production",
               "Wind power",    "Healthcare"};
    t.keywords = {
        {"Urban Planning", {"urban", "zoning", "city plan"}},
        {"Renewable Energy", {"renewable"}},
        {"Photovoltaic", {"photovoltaic", "solar panel", "solar farm"}},
        {"Fundraising", {"fundrais", "funding round", "raise capital"}},
        {"Recruitment", {"recruit", "hiring", "hire", "job creation"}},
        {"Acquisition", {"acquisition", "acquire", "takeover", "buyout", "merger"}},
        {"Agrivoltaics", {"agrivolta"}},
        {"Production", {"production", "factory", "manufactur"}},
        {"Wind power", {"wind power", "wind farm", "wind turbine", "offshore wind"}},
        {"Healthcare", {"health", "hospital", "clinic", "medical", "pharma"}},
    };
    return t;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& doc) {
    Taxonomy t;
    for (const auto& item : doc.at("names")) {
        t.names.push_back(item.get<std::string>());
    }
    if (t.names.empty()) {
        throw ConfigError("taxonomy must have at least one category");
    }
    if (doc.contains("keywords")) {
        for (const auto& [name, words] : doc["keywords"].items()) {
            for (const auto& w : words) {
                t.keywords[name].push_back(w.get<std::string>());
            }
        }
    }
    return t;
}

nlohmann::json Taxonomy::to_json() const {
    nlohmann::json doc;
    doc["names"] = names;
    doc["keywords"] = keywords;
    return doc;
}

std::string ValidationReport::to_jsonl() const {
    std::string out;
    for (const auto& issue : dropped) {
        nlohmann::ordered_json line;
        line["reason"] = issue.reason;
        line["event"] = issue.payload;
        out += line.dump() + "\n";
    }
    return out;
}

std::string normalize_company_name(const std::string& name) {
    static const std::regex paren_re(R"(\([^)]*\))");
    std::string s = std::regex_replace(name, paren_re, " ");
    s = text::to_upper_ascii(text::fold_lower(s));
    s = text::collapse_ws(s);

    static const std::vector<std::string> kSuffixes = {"SA", "SAS", "SARL",
                                                       "GMBH", "INC", "LTD"};
    for (;;) {
        auto cut = s.find_last_of(' ');
        std::string last = cut == std::string::npos ? s : s.substr(cut + 1);
        while (!last.empty() && (last.back() == '.' || last.back() == ',')) {
            last.pop_back();
        }
        if (cut == std::string::npos ||
            std::find(kSuffixes.begin(), kSuffixes.end(), last) == kSuffixes.end()) {
            break;
        }
        s = text::trim(s.substr(0, cut));
    }
    return s;
}

double jaro_winkler(const std::string& a, const std::string& b) {
    if (a.empty() && b.empty()) {
        return 1.0;
    }
    if (a.empty() || b.empty()) {
        return 0.0;
    }
    const std::size_t la = a.size();
    const std::size_t lb = b.size();
    std::size_t window = std::max(la, lb) / 2;
    window = window > 0 ? window - 1 : 0;

    std::vector<bool> a_match(la, false);
    std::vector<bool> b_match(lb, false);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < la; ++i) {
        std::size_t lo = i > window ? i - window : 0;
        std::size_t hi = std::min(lb, i + window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
            if (!b_match[j] && a[i] == b[j]) {
                a_match[i] = b_match[j] = true;
                ++matches;
                break;
            }
        }
    }
    if (matches == 0) {
        return 0.0;
    }
    std::size_t transpositions = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < la; ++i) {
        if (!a_match[i]) {
            continue;
        }
        while (!b_match[j]) {
            ++j;
        }
        if (a[i] != b[j]) {
            ++transpositions;
        }
        ++j;
    }
    double m = static_cast<double>(matches);
    double t = static_cast<double>(transpositions / 2);
    double jaro = (m / static_cast<double>(la) + m / static_cast<double>(lb) + (m - t) / m) / 3.0;

    std::size_t prefix = 0;
    while (prefix < 4 && prefix < la && prefix < lb && a[prefix] == b[prefix]) {
        ++prefix;
    }
    return jaro + static_cast<double>(prefix) * 0.1 * (1.0 - jaro);
}

std::optional<std::pair<ingest::CompanyRecord, double>> link_entity(
    const std::string& mention, const std::vector<ingest::CompanyRecord>& companies,
    double threshold) {
    std::string key = normalize_company_name(mention);
    if (key.empty()) {
        return std::nullopt;
    }
    // exact normalized equality wins over any fuzzy candidate
    const ingest::CompanyRecord* exact = nullptr;
    for (const auto& rec : companies) {
        if (normalize_company_name(rec.name) == key) {
            if (!exact || rec.siren < exact->siren) {
                exact = &rec;
            }
        }
    }
    if (exact) {
        return std::make_pair(*exact, 1.0);
    }
    const ingest::CompanyRecord* best = nullptr;
    double best_score = 0.0;
    for (const auto& rec : companies) {
        double score = jaro_winkler(key, normalize_company_name(rec.name));
        if (score > best_score ||
            (score == best_score && best && rec.siren < best->siren)) {
            best = &rec;
            best_score = score;
        }
    }
    if (best && best_score >= threshold) {
        return std::make_pair(*best, best_score);
    }
    return std::nullopt;
}

retrieval::Index build_reviews_index(const std::vector<ingest::ReviewRecord>& reviews,
                                     std::size_t max_tokens, std::size_t overlap) {
    std::vector<retrieval::Chunk> chunks;
    std::map<std::string, std::size_t> per_company;
    for (const auto& review : reviews) {
        std::string key = normalize_company_name(review.company_name);
        std::string doc_id = key + "/" + std::to_string(per_company[key]++);
        for (auto& c : retrieval::chunk(doc_id, review.text, max_tokens, overlap)) {
            chunks.push_back(std::move(c));
        }
    }
    return retrieval::Index::build(chunks);
}

nlohmann::ordered_json money_to_json(const ingest::MoneyAmount& m) {
    return {{"cents", m.minor_units}, {"currency", m.currency}};
}

ingest::MoneyAmount money_from_json(const nlohmann::json& j) {
    return ingest::MoneyAmount{j.at("cents").get<std::int64_t>(),
                               j.value("currency", "EUR")};
}

nlohmann::ordered_json event_to_json(const BusinessEvent& e) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["article_id"] = e.article_id;
    j["date"] = e.date.iso();
    j["summary"] = e.summary;
    j["companies"] = e.companies;
    j["persons"] = e.persons;
    j["locations"] = e.locations;
    j["amounts"] = nlohmann::ordered_json::array();
    for (const auto& m : e.amounts) {
        j["amounts"].push_back(money_to_json(m));
    }
    j["context"] = e.context;
    return j;
}

BusinessEvent event_from_json(const nlohmann::json& j) {
    BusinessEvent e;
    e.id = j.at("id").get<std::string>();
    e.article_id = j.at("article_id").get<std::string>();
    e.date = ingest::parse_date(j.at("date").get<std::string>());
    e.summary = j.value("summary", "");
    for (const auto& c : j.at("companies")) e.companies.push_back(c.get<std::string>());
    if (j.contains("persons"))
        for (const auto& p : j["persons"]) e.persons.push_back(p.get<std::string>());
    if (j.contains("locations"))
        for (const auto& l : j["locations"]) e.locations.push_back(l.get<std::string>());
    if (j.contains("amounts"))
        for (const auto& a : j["amounts"]) e.amounts.push_back(money_from_json(a));
    e.context = j.value("context", "");
    return e;
}

namespace {

nlohmann::ordered_json profile_to_json(const ingest::CompanyRecord& rec) {
    nlohmann::ordered_json j;
    j["siren"] = rec.siren;
    j["name"] = rec.name;
    j["hq_address"] = rec.hq_address;
    j["phone"] = rec.phone ? nlohmann::ordered_json(*rec.phone) : nullptr;
    j["employees"] = rec.employees ? nlohmann::ordered_json(*rec.employees) : nullptr;
    return j;
}

ingest::CompanyRecord profile_from_json(const nlohmann::json& j) {
    ingest::CompanyRecord rec;
    rec.siren = j.at("siren").get<std::string>();
    rec.name = j.at("name").get<std::string>();
    rec.hq_address = j.value("hq_address", "");
    if (j.contains("phone") && !j["phone"].is_null()) rec.phone = j["phone"].get<std::string>();
    if (j.contains("employees") && !j["employees"].is_null())
        rec.employees = j["employees"].get<std::string>();
    return rec;
}

nlohmann::ordered_json financial_to_json(const ingest::FinancialRecord& rec) {
    nlohmann::ordered_json j;
    j["company_name"] = rec.company_name;
    j["turnover"] = rec.turnover ? money_to_json(*rec.turnover) : nlohmann::ordered_json(nullptr);
    j["fiscal_year"] = rec.fiscal_year;
    return j;
}

ingest::FinancialRecord financial_from_json(const nlohmann::json& j) {
    ingest::FinancialRecord rec;
    rec.company_name = j.at("company_name").get<std::string>();
    if (j.contains("turnover") && !j["turnover"].is_null()) {
        rec.turnover = money_from_json(j["turnover"]);
    }
    rec.fiscal_year = j.at("fiscal_year").get<int>();
    return rec;
}

nlohmann::ordered_json link_to_json(const CompanyLink& link) {
    nlohmann::ordered_json j;
    j["mention"] = link.mention;
    j["siren"] = link.siren ? nlohmann::ordered_json(*link.siren) : nullptr;
    j["match_score"] = link.match_score;
    j["profile"] = link.profile ? profile_to_json(*link.profile) : nlohmann::ordered_json(nullptr);
    j["financial"] =
        link.financial ? financial_to_json(*link.financial) : nlohmann::ordered_json(nullptr);
    j["review_snippets"] = nlohmann::ordered_json::array();
    for (const auto& [snippet, score] : link.review_snippets) {
        j["review_snippets"].push_back({snippet, score});
    }
    return j;
}

CompanyLink link_from_json(const nlohmann::json& j) {
    CompanyLink link;
    link.mention = j.at("mention").get<std::string>();
    if (j.contains("siren") && !j["siren"].is_null()) link.siren = j["siren"].get<std::string>();
    link.match_score = j.value("match_score", 0.0);
    if (j.contains("profile") && !j["profile"].is_null()) {
        link.profile = profile_from_json(j["profile"]);
    }
    if (j.contains("financial") && !j["financial"].is_null()) {
        link.financial = financial_from_json(j["financial"]);
    }
    if (j.contains("review_snippets")) {
        for (const auto& s : j["review_snippets"]) {
            link.review_snippets.emplace_back(s.at(0).get<std::string>(),
                                              s.at(1).get<double>());
        }
    }
    return link;
}

}  // namespace

nlohmann::ordered_json enriched_to_json(const EnrichedEvent& e) {
    nlohmann::ordered_json j;
    j["event"] = event_to_json(e.event);
    j["links"] = nlohmann::ordered_json::array();
    for (const auto& link : e.links) {
        j["links"].push_back(link_to_json(link));
    }
    j["category"] = e.category ? nlohmann::ordered_json(*e.category) : nullptr;
    return j;
}

EnrichedEvent enriched_from_json(const nlohmann::json& j) {
    EnrichedEvent e;
    e.event = event_from_json(j.at("event"));
    if (j.contains("links")) {
        for (const auto& l : j["links"]) {
            e.links.push_back(link_from_json(l));
        }
    }
    if (j.contains("category") && !j["category"].is_null()) {
        e.category = j["category"].get<std::string>();
    }
    return e;
}

std::string events_to_jsonl(const std::vector<BusinessEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        out += event_to_json(e).dump() + "\n";
    }
    return out;
}

std::vector<BusinessEvent> events_from_jsonl(const std::string& content) {
    std::vector<BusinessEvent> events;
    for (const auto& line : text::split_lines(content)) {
        if (text::trim(line).empty()) continue;
        events.push_back(event_from_json(nlohmann::json::parse(line)));
    }
    return events;
}

std::string enriched_to_jsonl(const std::vector<EnrichedEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        out += enriched_to_json(e).dump() + "\n";
    }
    return out;
}

std::vector<EnrichedEvent> enriched_from_jsonl(const std::string& content) {
    std::vector<EnrichedEvent> events;
    for (const auto& line : text::split_lines(content)) {
        if (text::trim(line).empty()) continue;
        events.push_back(enriched_from_json(nlohmann::json::parse(line)));
    }
    return events;
}

namespace {

std::string format_articles_block(const std::vector<ingest::NewsArticle>& articles,
                                  std::size_t begin, std::size_t end) {
    std::string block;
    for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) {
            block += "\n\n";
        }
        block += "[" + articles[i].id + "] " + articles[i].date.iso() + "; " +
                 articles[i].body;
    }
    return block;
}

nlohmann::json completion_as_json_array(llm::Gateway& gateway, const crew::Agent& agent,
                                        const crew::Task& task, const crew::Context& context) {
    auto messages = crew::build_prompt(agent, task, context);
    std::string raw = gateway.complete(messages);
    nlohmann::json value;
    try {
        value = llm::extract_json(raw);
    } catch (const Error& e) {
        raw = crew::reprompt_on_bad_json(gateway, agent, task, context, raw, e.what());
        value = llm::extract_json(raw);
    }
    if (value.is_object()) {
        value = nlohmann::json::array({value});
    }
    if (!value.is_array()) {
        throw llm::NoJsonFound();
    }
    return value;
}

}  // namespace

std::vector<BusinessEvent> crawl_events(const std::vector<ingest::NewsArticle>& articles,
                                        llm::Gateway& gateway, const crew::Agent& agent,
                                        const crew::Task& task, std::size_t batch_size,
                                        ValidationReport& report) {
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    std::map<std::string, std::size_t> article_order;
    for (std::size_t i = 0; i < articles.size(); ++i) {
        article_order[articles[i].id] = i;
    }

    struct Pending {
        std::size_t article_index;
        BusinessEvent event;
    };
    std::vector<Pending> pending;

    for (std::size_t begin = 0; begin < articles.size(); begin += batch_size) {
        std::size_t end = std::min(begin + batch_size, articles.size());
        crew::Context context = {
            {"News articles", format_articles_block(articles, begin, end)}};
        nlohmann::json items = completion_as_json_array(gateway, agent, task, context);

        for (const auto& item : items) {
            if (!item.is_object()) {
                report.dropped.push_back({"event is not a JSON object", item});
                continue;
            }
            std::string article_id = item.value("article_id", "");
            auto order_it = article_order.find(article_id);
            if (order_it == article_order.end()) {
                report.dropped.push_back({"unknown article_id '" + article_id + "'", item});
                continue;
            }
            BusinessEvent event;
            event.article_id = article_id;
            if (item.contains("companies") && item["companies"].is_array()) {
                for (const auto& c : item["companies"]) {
                    if (c.is_string() && !text::trim(c.get<std::string>()).empty()) {
                        event.companies.push_back(text::trim(c.get<std::string>()));
                    }
                }
            }
            if (event.companies.empty()) {
                report.dropped.push_back({"event has no company", item});
                continue;
            }
            try {
                event.date = ingest::parse_date(item.value("date", ""));
            } catch (const ingest::UnparsableDate&) {
                event.date = articles[order_it->second].date;  // article date fallback
            }
            event.summary = item.value("summary", "");
            if (item.contains("persons") && item["persons"].is_array()) {
                for (const auto& p : item["persons"]) {
                    if (p.is_string()) event.persons.push_back(p.get<std::string>());
                }
            }
            if (item.contains("locations") && item["locations"].is_array()) {
                for (const auto& l : item["locations"]) {
                    if (l.is_string()) event.locations.push_back(l.get<std::string>());
                }
            }
            if (item.contains("amounts") && item["amounts"].is_array()) {
                for (const auto& a : item["amounts"]) {
                    if (a.is_object()) {
                        event.amounts.push_back(money_from_json(a));
                    } else if (a.is_string()) {
                        try {
                            if (auto m = ingest::parse_money(a.get<std::string>())) {
                                event.amounts.push_back(*m);
                            }
                        } catch (const ingest::UnparsableMoney&) {
                            // amount dropped, event kept
                        }
                    }
                }
            }
            event.context = item.value("context", "");
            pending.push_back(Pending{order_it->second, std::move(event)});
        }
    }

    std::stable_sort(pending.begin(), pending.end(),
                     [](const Pending& a, const Pending& b) {
                         return a.article_index < b.article_index;
                     });
    std::map<std::string, std::size_t> ordinals;
    std::vector<BusinessEvent> events;
    for (auto& p : pending) {
        p.event.id = p.event.article_id + "-e" + std::to_string(ordinals[p.event.article_id]++);
        events.push_back(std::move(p.event));
    }
    return events;
}

EnrichedEvent enrich_event(const BusinessEvent& event,
                           const std::vector<ingest::CompanyRecord>& companies,
                           const std::vector<ingest::FinancialRecord>& financials,
                           const retrieval::Index& reviews_index, std::size_t k,
                           double threshold) {
    EnrichedEvent enriched;
    enriched.event = event;
    for (const auto& mention : event.companies) {
        CompanyLink link;
        link.mention = mention;
        std::string company_key = normalize_company_name(mention);
        if (auto matched = link_entity(mention, companies, threshold)) {
            link.profile = matched->first;
            link.siren = matched->first.siren;
            link.match_score = matched->second;
            company_key = normalize_company_name(matched->first.name);
        }
        for (const auto& fin : financials) {
            if (normalize_company_name(fin.company_name) == company_key) {
                link.financial = fin;
                break;
            }
        }
        auto hits = reviews_index.retrieve(mention + " " + event.summary, k);
        for (const auto& hit : hits) {
            auto slash = hit.chunk.doc_id.find('/');
            if (hit.chunk.doc_id.substr(0, slash) != company_key) {
                continue;
            }
            const auto& refs = reviews_index.chunk_refs();
            auto it = std::lower_bound(refs.begin(), refs.end(), hit.chunk);
            if (it != refs.end() && *it == hit.chunk) {
                std::size_t slot = static_cast<std::size_t>(it - refs.begin());
                link.review_snippets.emplace_back(reviews_index.chunk_texts()[slot], hit.score);
            }
        }
        enriched.links.push_back(std::move(link));
    }
    return enriched;
}

std::string classify_event(const EnrichedEvent& enriched, const Taxonomy& taxonomy,
                           llm::Gateway& gateway, const crew::Agent& agent) {
    if (taxonomy.names.empty()) {
        throw ConfigError("taxonomy must be non-empty");
    }
    crew::Task task;
    task.description =
        "Classify the business event into exactly one of the given categories. Reply "
        "with exactly one category name from the list and nothing else.";
    task.agent_role = agent.role;
    task.output_kind = crew::OutputKind::free_text;

    std::string category_list;
    for (const auto& name : taxonomy.names) {
        category_list += name + "\n";
    }
    crew::Context context = {
        {"Categories", category_list},
        {"Event", "Summary: " + enriched.event.summary +
                      "\nContext: " + enriched.event.context}};
    std::string reply = gateway.complete(crew::build_prompt(agent, task, context));

    std::string cleaned = text::trim(reply);
    while (!cleaned.empty() && (cleaned.front() == '"' || cleaned.front() == '`' ||
                                cleaned.front() == '\'')) {
        cleaned.erase(cleaned.begin());
    }
    while (!cleaned.empty() && (cleaned.back() == '"' || cleaned.back() == '`' ||
                                cleaned.back() == '\'' || cleaned.back() == '.')) {
        cleaned.pop_back();
    }
    if (auto canonical = taxonomy.member(cleaned)) {
        return *canonical;
    }
    // keyword fallback over the event text, in taxonomy order
    std::string haystack =
        text::fold_lower(enriched.event.summary + " " + enriched.event.context);
    for (const auto& name : taxonomy.names) {
        auto kw_it = taxonomy.keywords.find(name);
        if (kw_it == taxonomy.keywords.end()) {
            continue;
        }
        for (const auto& kw : kw_it->second) {
            if (haystack.find(text::fold_lower(kw)) != std::string::npos) {
                return name;
            }
        }
    }
    return Taxonomy::kUncategorized;
}

crew::Crew default_crew() {
    crew::Crew c;
    c.agents = {
        {"Events Crawler", "Load news data and extract business events with named entities.",
         "Business news articles contain entities such as company names, individuals, "
         "contextual information, dates, and locations."},
        {"Events Enrichment", "Utilize Financial data, Internal Company data, and Consumer "
         "reviews data.",
         "Associating the entities identified in the news events with their corresponding "
         "data."},
        {"Events Explorer", "Display categorized business events.",
         "Business events must be classified according to their topics."},
    };
    c.tasks = {
        {"Gather events data", "Events Crawler", crew::OutputKind::json_events, nullptr},
        {"Enrich the data", "Events Enrichment", crew::OutputKind::json_enriched, nullptr},
        {"Classify the events", "Events Explorer", crew::OutputKind::json_classified, nullptr},
    };
    c.process = "sequential";
    return c;
}

namespace {

// Raw output of the task owned by `role`, searched newest-first.
const std::string& context_block(const crew::Context& context, const std::string& role) {
    for (auto it = context.rbegin(); it != context.rend(); ++it) {
        if (it->first == role) {
            return it->second;
        }
    }
    throw Error("missing context block for role: " + role);
}

}  // namespace

std::vector<EnrichedEvent> run_pipeline(const PipelineData& data, const crew::Crew& crew_def,
                                        llm::Gateway& gateway, const PipelineConfig& config,
                                        const Taxonomy& taxonomy, ValidationReport& report) {
    if (data.articles.empty()) {
        return {};
    }
    if (crew_def.tasks.size() != 3) {
        throw ConfigError("pipeline crew must define exactly three tasks");
    }
    retrieval::Index reviews_index =
        build_reviews_index(data.reviews, config.chunk_max_tokens, config.chunk_overlap);

    crew::Crew crew = crew_def;
    const std::string crawler_role = crew.tasks[0].agent_role;
    const std::string enrichment_role = crew.tasks[1].agent_role;

    crew.tasks[0].runner = [&](llm::Gateway& gw, const crew::Agent& agent,
                               const crew::Task& task, const crew::Context&) {
        auto events = crawl_events(data.articles, gw, agent, task, config.batch_size, report);
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& e : events) {
            arr.push_back(event_to_json(e));
        }
        return arr.dump();
    };
    crew.tasks[1].runner = [&](llm::Gateway&, const crew::Agent&, const crew::Task&,
                               const crew::Context& context) {
        // deterministic join stage, no model call
        nlohmann::json events_json = nlohmann::json::parse(context_block(context, crawler_role));
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& ej : events_json) {
            auto enriched = enrich_event(event_from_json(ej), data.companies, data.financials,
                                         reviews_index, config.snippet_k,
                                         config.link_threshold);
            arr.push_back(enriched_to_json(enriched));
        }
        return arr.dump();
    };
    crew.tasks[2].runner = [&](llm::Gateway& gw, const crew::Agent& agent, const crew::Task&,
                               const crew::Context& context) {
        nlohmann::json enriched_json =
            nlohmann::json::parse(context_block(context, enrichment_role));
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& ej : enriched_json) {
            EnrichedEvent enriched = enriched_from_json(ej);
            enriched.category = classify_event(enriched, taxonomy, gw, agent);
            arr.push_back(enriched_to_json(enriched));
        }
        return arr.dump();
    };

    crew::CrewResult result = crew::run_crew(crew, gateway, {});
    std::vector<EnrichedEvent> out;
    for (const auto& ej : *result.final().parsed) {
        out.push_back(enriched_from_json(ej));
    }
    return out;
}

}  // namespace crewline::stages
