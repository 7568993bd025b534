#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crewline/errors.hpp"
#include "crewline/llm.hpp"

namespace crewline::crew {

struct Agent {
    std::string role;
    std::string goal;
    std::string backstory;
};

enum class OutputKind { free_text, json_events, json_enriched, json_classified };

std::string output_kind_name(OutputKind kind);
OutputKind output_kind_from_name(const std::string& name);

/// Labelled context blocks handed to a task, in insertion order.
using Context = std::vector<std::pair<std::string, std::string>>;

struct Task;

/// A task normally runs as a single chat completion; stages that need
/// batched or deterministic execution install a runner instead.
using TaskRunner = std::function<std::string(llm::Gateway&, const Agent&, const Task&,
                                             const Context&)>;

struct Task {
    std::string description;
    std::string agent_role;
    OutputKind output_kind = OutputKind::free_text;
    TaskRunner runner;
};

struct Crew {
    std::vector<Agent> agents;
    std::vector<Task> tasks;
    std::string process = "sequential";
    std::size_t context_token_budget = 120000;
};

struct TaskOutput {
    std::size_t index = 0;
    std::string raw;
    std::optional<nlohmann::json> parsed;
};

struct CrewResult {
    std::vector<TaskOutput> per_task;
    const TaskOutput& final() const { return per_task.back(); }
};

const Agent& find_agent(const Crew& crew, const std::string& role);

std::string output_format_instruction(OutputKind kind);

/// Deterministic prompt template: fixed-order system sections, then the
/// task description, `### <label>` context blocks in insertion order, and
/// the output-format instruction. When `token_budget` is nonzero, oldest
/// context blocks drop first until the prompt fits; the description never
/// drops.
std::vector<llm::ChatMessage> build_prompt(const Agent& agent, const Task& task,
                                           const Context& context,
                                           std::size_t token_budget = 0);

/// One corrective turn after invalid JSON output: replays the exchange
/// with the validation error appended and asks for valid JSON only.
std::string reprompt_on_bad_json(llm::Gateway& gateway, const Agent& agent, const Task& task,
                                 const Context& context, const std::string& bad_output,
                                 const std::string& error_message);

/// Executes tasks strictly in list order. Task i sees the initial context
/// plus the raw outputs of tasks 0..i-1 labelled by their agents' roles.
/// Stops at the first unrecoverable task error with TaskFailed.
CrewResult run_crew(const Crew& crew, llm::Gateway& gateway, const Context& initial_context);

/// Declarative crew definition:
/// {"agents":[{role,goal,backstory}],"tasks":[{description,agent_role,output_kind}],
///  "process":"sequential"}
Crew crew_from_json(const nlohmann::json& doc);
nlohmann::json crew_to_json(const Crew& crew);

}  // namespace crewline::crew
