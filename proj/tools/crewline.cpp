#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crewline/config.hpp"
#include "crewline/crew.hpp"
#include "crewline/ingest.hpp"
#include "crewline/llm.hpp"
#include "crewline/log.hpp"
#include "crewline/report.hpp"
#include "crewline/retrieval.hpp"
#include "crewline/stages.hpp"

namespace fs = std::filesystem;
using namespace crewline;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_override;
    std::string replay_path;
    std::string record_path;
    std::string category;
    std::string month;
    bool verbose = false;
};

config::RunConfig load_config(const CliOptions& opts) {
    if (opts.config_path.empty()) {
        throw ConfigError("--config is required");
    }
    config::RunConfig cfg = config::load_run_config(opts.config_path);
    if (!opts.out_override.empty()) {
        cfg.out_dir = opts.out_override;
    }
    if (!opts.replay_path.empty()) {
        if (!fs::exists(opts.replay_path)) {
            throw ConfigError("replay transcript does not exist: " + opts.replay_path);
        }
        cfg.gateway.provider = llm::Provider::replay;
        cfg.gateway.transcript_path = opts.replay_path;
        cfg.gateway.record = false;
    }
    if (!opts.record_path.empty()) {
        cfg.gateway.record = true;
        cfg.gateway.transcript_path = opts.record_path;
        std::ofstream probe(opts.record_path, std::ios::binary | std::ios::trunc);
        if (!probe) {
            throw ConfigError("transcript path is not writable: " + opts.record_path);
        }
    }
    if (!opts.category.empty()) {
        cfg.focus_category = opts.category;
    }
    if (!opts.month.empty()) {
        cfg.month = report::YearMonth::parse(opts.month);
    }
    if (opts.verbose) {
        cfg.verbosity = 1;
    }
    fs::create_directories(cfg.out_dir);
    return cfg;
}

std::string out_path(const config::RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << content;
}

std::ofstream open_log(const config::RunConfig& cfg, const std::string& command) {
    std::ofstream out(out_path(cfg, command + ".log"), std::ios::binary);
    if (!out) {
        throw IoError("cannot open log file in " + cfg.out_dir);
    }
    return out;
}

report::Gazetteer load_gazetteer(const config::RunConfig& cfg) {
    if (cfg.paths.gazetteer.empty()) {
        return report::Gazetteer::default_french_regions();
    }
    return report::Gazetteer::from_json(
        nlohmann::json::parse(ingest::read_file(cfg.paths.gazetteer)));
}

stages::PipelineData load_corpora(const config::RunConfig& cfg, bool need_news) {
    stages::PipelineData data;
    if (!cfg.paths.news.empty()) {
        data.articles = ingest::load_news(cfg.paths.news);
    } else if (need_news) {
        throw ConfigError("paths.news is required for this command");
    }
    if (!cfg.paths.companies.empty()) {
        data.companies = ingest::load_company_records(cfg.paths.companies);
    }
    if (!cfg.paths.financials.empty()) {
        data.financials = ingest::load_financial_records(cfg.paths.financials);
    }
    if (!cfg.paths.reviews.empty()) {
        data.reviews = ingest::load_reviews(cfg.paths.reviews);
    }
    return data;
}

std::string articles_to_jsonl(const std::vector<ingest::NewsArticle>& articles) {
    std::string out;
    for (const auto& a : articles) {
        nlohmann::ordered_json j;
        j["id"] = a.id;
        j["date"] = a.date.iso();
        j["body"] = a.body;
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<ingest::NewsArticle> articles_from_jsonl(const std::string& content) {
    std::vector<ingest::NewsArticle> articles;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        articles.push_back(ingest::NewsArticle{j.at("id").get<std::string>(),
                                               ingest::parse_date(j.at("date").get<std::string>()),
                                               j.at("body").get<std::string>()});
    }
    return articles;
}

void write_reports(const config::RunConfig& cfg,
                   const std::vector<stages::EnrichedEvent>& events,
                   log::JsonlLogger& logger) {
    std::optional<report::YearMonth> month = cfg.month;
    if (!month && !events.empty()) {
        month = report::YearMonth{events.front().event.date.year,
                                  events.front().event.date.month};
    }
    if (!month) {
        logger.info("report_skipped", {{"reason", "no month configured and no events"}});
        return;
    }
    auto gazetteer = load_gazetteer(cfg);
    report::Report rep = report::build_report(events, *month, cfg.focus_category, gazetteer);
    std::vector<std::string> written;
    for (auto format : {report::ReportFormat::json, report::ReportFormat::csv_bundle,
                        report::ReportFormat::markdown}) {
        for (auto& p : report::render_report(rep, format, cfg.out_dir)) {
            written.push_back(std::move(p));
        }
    }
    logger.info("report_written",
                {{"month", month->str()}, {"category", cfg.focus_category},
                 {"files", written.size()}});
}

int cmd_run(const CliOptions& opts) {
    config::RunConfig cfg = load_config(opts);
    auto log_stream = open_log(cfg, "run");
    log::JsonlLogger logger(log_stream, cfg.verbosity);

    auto data = load_corpora(cfg, true);
    logger.info("corpus_loaded",
                {{"articles", data.articles.size()}, {"companies", data.companies.size()},
                 {"financials", data.financials.size()}, {"reviews", data.reviews.size()}});

    auto gateway = llm::make_gateway(cfg.gateway);
    stages::ValidationReport validation;
    auto events = stages::run_pipeline(data, cfg.crew_def, *gateway, cfg.pipeline,
                                       cfg.taxonomy, validation);
    logger.info("pipeline_done",
                {{"events", events.size()}, {"dropped", validation.dropped.size()}});

    write_file(out_path(cfg, "events.jsonl"), stages::enriched_to_jsonl(events));
    write_file(out_path(cfg, "validation.jsonl"), validation.to_jsonl());
    write_reports(cfg, events, logger);
    return 0;
}

int cmd_ingest(const CliOptions& opts) {
    config::RunConfig cfg = load_config(opts);
    auto log_stream = open_log(cfg, "ingest");
    log::JsonlLogger logger(log_stream, cfg.verbosity);

    auto articles = ingest::load_news(cfg.paths.news);
    write_file(out_path(cfg, "articles.jsonl"), articles_to_jsonl(articles));
    logger.info("ingested", {{"articles", articles.size()}});
    return 0;
}

int cmd_extract(const CliOptions& opts) {
    config::RunConfig cfg = load_config(opts);
    auto log_stream = open_log(cfg, "extract");
    log::JsonlLogger logger(log_stream, cfg.verbosity);

    auto articles = articles_from_jsonl(ingest::read_file(out_path(cfg, "articles.jsonl")));
    auto gateway = llm::make_gateway(cfg.gateway);
    const auto& task = cfg.crew_def.tasks.at(0);
    const auto& agent = crew::find_agent(cfg.crew_def, task.agent_role);
    stages::ValidationReport validation;
    auto events = stages::crawl_events(articles, *gateway, agent, task,
                                       cfg.pipeline.batch_size, validation);
    write_file(out_path(cfg, "events.raw.jsonl"), stages::events_to_jsonl(events));
    write_file(out_path(cfg, "validation.jsonl"), validation.to_jsonl());
    logger.info("extracted", {{"events", events.size()}, {"dropped", validation.dropped.size()}});
    return 0;
}

int cmd_enrich(const CliOptions& opts) {
    config::RunConfig cfg = load_config(opts);
    auto log_stream = open_log(cfg, "enrich");
    log::JsonlLogger logger(log_stream, cfg.verbosity);

    auto events = stages::events_from_jsonl(ingest::read_file(out_path(cfg, "events.raw.jsonl")));
    auto data = load_corpora(cfg, false);
    auto index = stages::build_reviews_index(data.reviews, cfg.pipeline.chunk_max_tokens,
                                             cfg.pipeline.chunk_overlap);
    std::vector<stages::EnrichedEvent> enriched;
    for (const auto& e : events) {
        enriched.push_back(stages::enrich_event(e, data.companies, data.financials, index,
                                                cfg.pipeline.snippet_k,
                                                cfg.pipeline.link_threshold));
    }
    write_file(out_path(cfg, "enriched.jsonl"), stages::enriched_to_jsonl(enriched));
    logger.info("enriched", {{"events", enriched.size()}});
    return 0;
}

int cmd_classify(const CliOptions& opts) {
    config::RunConfig cfg = load_config(opts);
    auto log_stream = open_log(cfg, "classify");
    log::JsonlLogger logger(log_stream, cfg.verbosity);

    auto enriched = stages::enriched_from_jsonl(ingest::read_file(out_path(cfg, "enriched.jsonl")));
    auto gateway = llm::make_gateway(cfg.gateway);
    const auto& task = cfg.crew_def.tasks.at(2);
    const auto& agent = crew::find_agent(cfg.crew_def, task.agent_role);
    for (auto& e : enriched) {
        e.category = stages::classify_event(e, cfg.taxonomy, *gateway, agent);
    }
    write_file(out_path(cfg, "events.jsonl"), stages::enriched_to_jsonl(enriched));
    logger.info("classified", {{"events", enriched.size()}});
    return 0;
}

int cmd_report(const CliOptions& opts) {
    config::RunConfig cfg = load_config(opts);
    auto log_stream = open_log(cfg, "report");
    log::JsonlLogger logger(log_stream, cfg.verbosity);

    auto events = stages::enriched_from_jsonl(ingest::read_file(out_path(cfg, "events.jsonl")));
    write_reports(cfg, events, logger);
    return 0;
}

// Runs the pipeline against canned responses while recording a transcript
// with real request fingerprints, so the run replays later.
int cmd_script(const CliOptions& opts, const std::string& responses_path) {
    config::RunConfig cfg = load_config(opts);
    if (opts.record_path.empty()) {
        throw ConfigError("script requires --record <transcript out>");
    }
    auto log_stream = open_log(cfg, "script");
    log::JsonlLogger logger(log_stream, cfg.verbosity);

    std::vector<std::string> responses;
    std::istringstream in(ingest::read_file(responses_path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        responses.push_back(j.is_string() ? j.get<std::string>()
                                          : j.at("response").get<std::string>());
    }
    llm::ScriptedGateway gateway(cfg.gateway, responses);

    auto data = load_corpora(cfg, true);
    stages::ValidationReport validation;
    auto events = stages::run_pipeline(data, cfg.crew_def, gateway, cfg.pipeline,
                                       cfg.taxonomy, validation);
    write_file(out_path(cfg, "events.jsonl"), stages::enriched_to_jsonl(events));
    write_file(out_path(cfg, "validation.jsonl"), validation.to_jsonl());
    write_reports(cfg, events, logger);
    logger.info("transcript_recorded", {{"path", opts.record_path}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent business event extraction pipeline"};
    app.require_subcommand(1);

    CliOptions opts;
    app.add_option("--config", opts.config_path, "Run configuration file (JSON)");
    app.add_option("--out", opts.out_override, "Output directory override");
    app.add_option("--replay", opts.replay_path, "Replay transcript (forces replay provider)");
    app.add_option("--record", opts.record_path, "Record transcript to this path");
    app.add_option("--category", opts.category, "Report focus category");
    app.add_option("--month", opts.month, "Report month (YYYY-MM)");
    app.add_flag("--verbose", opts.verbose, "Verbose logging");

    auto* run = app.add_subcommand("run", "Full pipeline: load, extract, enrich, classify, report");
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse the news corpus to articles.jsonl");
    auto* extract = app.add_subcommand("extract", "Extract events from articles.jsonl");
    auto* enrich = app.add_subcommand("enrich", "Enrich events.raw.jsonl with company data");
    auto* classify = app.add_subcommand("classify", "Classify enriched.jsonl into categories");
    auto* report_cmd = app.add_subcommand("report", "Aggregate events.jsonl into report files");
    auto* script = app.add_subcommand(
        "script", "Record a replayable transcript from canned responses");
    std::string responses_path;
    script->add_option("--responses", responses_path, "Canned responses (JSON Lines)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(opts);
        if (ingest_cmd->parsed()) return cmd_ingest(opts);
        if (extract->parsed()) return cmd_extract(opts);
        if (enrich->parsed()) return cmd_enrich(opts);
        if (classify->parsed()) return cmd_classify(opts);
        if (report_cmd->parsed()) return cmd_report(opts);
        if (script->parsed()) return cmd_script(opts, responses_path);
        std::cerr << "no subcommand given\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const crew::TaskFailed& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
