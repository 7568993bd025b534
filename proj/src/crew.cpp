#include "crewline/crew.hpp"

#include <algorithm>

#include "crewline/retrieval.hpp"

namespace crewline::crew {

std::string output_kind_name(OutputKind kind) {
    switch (kind) {
        case OutputKind::free_text: return "free_text";
        case OutputKind::json_events: return "json_events";
        case OutputKind::json_enriched: return "json_enriched";
        case OutputKind::json_classified: return "json_classified";
    }
    return "free_text";
}

OutputKind output_kind_from_name(const std::string& name) {
    if (name == "free_text") return OutputKind::free_text;
    if (name == "json_events") return OutputKind::json_events;
    if (name == "json_enriched") return OutputKind::json_enriched;
    if (name == "json_classified") return OutputKind::json_classified;
    throw ConfigError("unknown output_kind: " + name);
}

const Agent& find_agent(const Crew& crew, const std::string& role) {
    for (const auto& agent : crew.agents) {
        if (agent.role == role) {
            return agent;
        }
    }
    throw ConfigError("task references unknown agent role: " + role);
}

std::string output_format_instruction(OutputKind kind) {
    switch (kind) {
        case OutputKind::free_text:
            return "Respond in plain prose.";
        case OutputKind::json_events:
            return "Return only a JSON array of event objects. Each object must have these "
                   "fields: article_id (string), date (string), summary (string), companies "
                   "(array of strings), persons (array of strings), locations (array of "
                   "strings), amounts (array of strings), context (string). Do not write "
                   "anything outside the JSON array.";
        case OutputKind::json_enriched:
            return "Return only a JSON array of enriched event objects. Do not write anything "
                   "outside the JSON array.";
        case OutputKind::json_classified:
            return "Return only a JSON array of classified event objects. Do not write "
                   "anything outside the JSON array.";
    }
    return "";
}

std::vector<llm::ChatMessage> build_prompt(const Agent& agent, const Task& task,
                                           const Context& context, std::size_t token_budget) {
    std::string system = "Role: " + agent.role + "\nGoal: " + agent.goal +
                         "\nBackstory: " + agent.backstory;

    Context blocks = context;
    if (token_budget > 0) {
        auto count = [](const std::string& s) { return retrieval::tokenize(s).size(); };
        std::size_t total = count(task.description);
        for (const auto& [label, body] : blocks) {
            total += count(label) + count(body);
        }
        // oldest blocks drop first; the description never drops
        while (total > token_budget && !blocks.empty()) {
            total -= count(blocks.front().first) + count(blocks.front().second);
            blocks.erase(blocks.begin());
        }
    }

    std::string user = task.description;
    for (const auto& [label, body] : blocks) {
        user += "\n\n### " + label + "\n" + body;
    }
    std::string instruction = output_format_instruction(task.output_kind);
    if (!instruction.empty()) {
        user += "\n\n" + instruction;
    }
    return {llm::ChatMessage{llm::Role::system, system},
            llm::ChatMessage{llm::Role::user, user}};
}

std::string reprompt_on_bad_json(llm::Gateway& gateway, const Agent& agent, const Task& task,
                                 const Context& context, const std::string& bad_output,
                                 const std::string& error_message) {
    auto messages = build_prompt(agent, task, context);
    messages.push_back(llm::ChatMessage{llm::Role::assistant, bad_output});
    messages.push_back(llm::ChatMessage{
        llm::Role::user, "Your previous reply was not valid JSON: " + error_message +
                             "\nReturn only valid JSON."});
    return gateway.complete(messages);
}

namespace {

nlohmann::json parse_task_output(llm::Gateway& gateway, const Agent& agent, const Task& task,
                                 const Context& context, std::string& raw) {
    try {
        return llm::extract_json(raw);
    } catch (const Error& first_error) {
        // one corrective turn, then give up
        raw = reprompt_on_bad_json(gateway, agent, task, context, raw, first_error.what());
        return llm::extract_json(raw);
    }
}

}  // namespace

CrewResult run_crew(const Crew& crew, llm::Gateway& gateway, const Context& initial_context) {
    if (crew.process != "sequential") {
        throw ConfigError("unsupported crew process: " + crew.process);
    }
    for (const auto& task : crew.tasks) {
        find_agent(crew, task.agent_role);  // validates up front
        if (task.description.empty()) {
            throw ConfigError("task with empty description");
        }
    }

    CrewResult result;
    for (std::size_t i = 0; i < crew.tasks.size(); ++i) {
        const Task& task = crew.tasks[i];
        const Agent& agent = find_agent(crew, task.agent_role);

        Context context = initial_context;
        for (const auto& prior : result.per_task) {
            context.emplace_back(crew.tasks[prior.index].agent_role, prior.raw);
        }

        TaskOutput output;
        output.index = i;
        try {
            if (task.runner) {
                output.raw = task.runner(gateway, agent, task, context);
            } else {
                output.raw = gateway.complete(
                    build_prompt(agent, task, context, crew.context_token_budget));
            }
            if (task.output_kind != OutputKind::free_text) {
                output.parsed = parse_task_output(gateway, agent, task, context, output.raw);
            }
        } catch (const Error& e) {
            throw TaskFailed(i, e.what());
        }
        result.per_task.push_back(std::move(output));
    }
    return result;
}

Crew crew_from_json(const nlohmann::json& doc) {
    Crew crew;
    for (const auto& a : doc.at("agents")) {
        Agent agent{a.at("role").get<std::string>(), a.at("goal").get<std::string>(),
                    a.at("backstory").get<std::string>()};
        if (agent.role.empty() || agent.goal.empty() || agent.backstory.empty()) {
            throw ConfigError("agent role/goal/backstory must be non-empty");
        }
        crew.agents.push_back(std::move(agent));
    }
    for (const auto& t : doc.at("tasks")) {
        Task task;
        task.description = t.at("description").get<std::string>();
        task.agent_role = t.at("agent_role").get<std::string>();
        task.output_kind = output_kind_from_name(t.value("output_kind", "free_text"));
        crew.tasks.push_back(std::move(task));
    }
    crew.process = doc.value("process", "sequential");
    for (const auto& task : crew.tasks) {
        find_agent(crew, task.agent_role);
    }
    return crew;
}

nlohmann::json crew_to_json(const Crew& crew) {
    nlohmann::json doc;
    doc["agents"] = nlohmann::json::array();
    for (const auto& a : crew.agents) {
        doc["agents"].push_back(
            {{"role", a.role}, {"goal", a.goal}, {"backstory", a.backstory}});
    }
    doc["tasks"] = nlohmann::json::array();
    for (const auto& t : crew.tasks) {
        doc["tasks"].push_back({{"description", t.description},
                                {"agent_role", t.agent_role},
                                {"output_kind", output_kind_name(t.output_kind)}});
    }
    doc["process"] = crew.process;
    return doc;
}

}  // namespace crewline::crew
