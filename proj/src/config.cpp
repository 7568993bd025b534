#include "crewline/config.hpp"

#include <cstdlib>
#include <filesystem>

#include "crewline/ingest.hpp"

namespace crewline::config {

namespace {

std::string interpolate_env_string(const std::string& value) {
    std::string out;
    std::size_t i = 0;
    while (i < value.size()) {
        if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
            auto close = value.find('}', i + 2);
            if (close == std::string::npos) {
                throw ConfigError("unterminated ${...} in config value: " + value);
            }
            std::string name = value.substr(i + 2, close - i - 2);
            const char* env = std::getenv(name.c_str());
            out += env ? env : "";
            i = close + 1;
        } else {
            out += value[i++];
        }
    }
    return out;
}

llm::Provider provider_from_name(const std::string& name) {
    if (name == "remote_chat") return llm::Provider::remote_chat;
    if (name == "local_chat") return llm::Provider::local_chat;
    if (name == "replay") return llm::Provider::replay;
    throw ConfigError("unknown gateway provider: " + name);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty()) {
        return path;
    }
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) {
        return path;
    }
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

void require_exists(const std::string& what, const std::string& path) {
    if (!path.empty() && !std::filesystem::exists(path)) {
        throw ConfigError(what + " file does not exist: " + path);
    }
}

}  // namespace

nlohmann::json interpolate_env(const nlohmann::json& doc) {
    if (doc.is_string()) {
        return interpolate_env_string(doc.get<std::string>());
    }
    if (doc.is_object()) {
        nlohmann::json out = nlohmann::json::object();
        for (const auto& [key, value] : doc.items()) {
            out[key] = interpolate_env(value);
        }
        return out;
    }
    if (doc.is_array()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& value : doc) {
            out.push_back(interpolate_env(value));
        }
        return out;
    }
    return doc;
}

RunConfig run_config_from_json(const nlohmann::json& raw, const std::string& base_dir) {
    nlohmann::json doc = interpolate_env(raw);
    RunConfig cfg;

    if (doc.contains("paths")) {
        const auto& p = doc["paths"];
        cfg.paths.news = resolve(base_dir, p.value("news", ""));
        cfg.paths.companies = resolve(base_dir, p.value("companies", ""));
        cfg.paths.financials = resolve(base_dir, p.value("financials", ""));
        cfg.paths.reviews = resolve(base_dir, p.value("reviews", ""));
        cfg.paths.gazetteer = resolve(base_dir, p.value("gazetteer", ""));
        cfg.paths.transcript = resolve(base_dir, p.value("transcript", ""));
    }

    if (doc.contains("gateway")) {
        const auto& g = doc["gateway"];
        cfg.gateway.provider = provider_from_name(g.value("provider", "replay"));
        cfg.gateway.model = g.value("model", cfg.gateway.model);
        cfg.gateway.base_url = g.value("base_url", "");
        cfg.gateway.temperature = g.value("temperature", 0.0);
        if (cfg.gateway.temperature < 0.0 || cfg.gateway.temperature > 2.0) {
            throw ConfigError("temperature must be in [0,2]");
        }
        cfg.gateway.max_output_tokens = g.value("max_output_tokens", cfg.gateway.max_output_tokens);
        cfg.gateway.timeout = std::chrono::milliseconds(g.value("timeout_ms", 30000));
        cfg.gateway.max_retries = g.value("max_retries", cfg.gateway.max_retries);
        cfg.gateway.backoff_base =
            std::chrono::milliseconds(g.value("backoff_ms", 1000));
        cfg.gateway.max_concurrent = g.value("max_concurrent", cfg.gateway.max_concurrent);
    }
    cfg.gateway.transcript_path = cfg.paths.transcript;

    if (doc.contains("crew")) {
        cfg.crew_def = crew::crew_from_json(doc["crew"]);
    }
    if (doc.contains("taxonomy")) {
        if (doc["taxonomy"].is_array()) {
            stages::Taxonomy t = stages::Taxonomy::default_taxonomy();
            std::vector<std::string> names;
            for (const auto& n : doc["taxonomy"]) {
                names.push_back(n.get<std::string>());
            }
            t.names = std::move(names);
            cfg.taxonomy = std::move(t);
        } else {
            cfg.taxonomy = stages::Taxonomy::from_json(doc["taxonomy"]);
        }
    }
    if (doc.contains("retrieval")) {
        const auto& r = doc["retrieval"];
        cfg.pipeline.chunk_max_tokens = r.value("chunk_max_tokens", cfg.pipeline.chunk_max_tokens);
        cfg.pipeline.chunk_overlap = r.value("chunk_overlap", cfg.pipeline.chunk_overlap);
        cfg.pipeline.snippet_k = r.value("k", cfg.pipeline.snippet_k);
        if (cfg.pipeline.chunk_max_tokens < 1 ||
            cfg.pipeline.chunk_overlap >= cfg.pipeline.chunk_max_tokens) {
            throw ConfigError("retrieval: require chunk_overlap < chunk_max_tokens >= 1");
        }
    }
    cfg.pipeline.link_threshold = doc.value("link_threshold", cfg.pipeline.link_threshold);
    if (cfg.pipeline.link_threshold <= 0.0 || cfg.pipeline.link_threshold > 1.0) {
        throw ConfigError("link_threshold must be in (0,1]");
    }
    cfg.pipeline.batch_size = doc.value("batch_size", cfg.pipeline.batch_size);
    if (cfg.pipeline.batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }

    if (doc.contains("report")) {
        const auto& r = doc["report"];
        if (r.contains("month")) {
            cfg.month = report::YearMonth::parse(r["month"].get<std::string>());
        }
        cfg.focus_category = r.value("category", "");
    }
    if (cfg.focus_category.empty() && !cfg.taxonomy.names.empty()) {
        cfg.focus_category = cfg.taxonomy.names.front();
    }
    cfg.out_dir = doc.value("out_dir", cfg.out_dir);
    cfg.verbosity = doc.value("verbosity", 0);

    require_exists("news", cfg.paths.news);
    require_exists("companies", cfg.paths.companies);
    require_exists("financials", cfg.paths.financials);
    require_exists("reviews", cfg.paths.reviews);
    require_exists("gazetteer", cfg.paths.gazetteer);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(ingest::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    std::string base_dir = std::filesystem::path(path).parent_path().string();
    return run_config_from_json(doc, base_dir);
}

}  // namespace crewline::config
