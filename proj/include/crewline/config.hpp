#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "crewline/crew.hpp"
#include "crewline/llm.hpp"
#include "crewline/report.hpp"
#include "crewline/stages.hpp"

namespace crewline::config {

struct RunConfig {
    struct Paths {
        std::string news;
        std::string companies;
        std::string financials;
        std::string reviews;
        std::string gazetteer;   // optional; default French regions
        std::string transcript;  // replay source or record sink
    } paths;

    llm::LlmConfig gateway;
    crew::Crew crew_def = stages::default_crew();
    stages::Taxonomy taxonomy = stages::Taxonomy::default_taxonomy();
    stages::PipelineConfig pipeline;
    std::optional<report::YearMonth> month;
    std::string focus_category;
    std::string out_dir = "out";
    int verbosity = 0;
};

/// Loads a JSON run configuration. `${NAME}` in string values interpolates
/// from the environment (intended for secrets). Referenced input files
/// must exist.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const nlohmann::json& doc, const std::string& base_dir);

/// Replaces every `${NAME}` in string values with the environment value.
nlohmann::json interpolate_env(const nlohmann::json& doc);

}  // namespace crewline::config
