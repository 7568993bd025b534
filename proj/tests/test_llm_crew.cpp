#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "crewline/crew.hpp"
#include "crewline/llm.hpp"
#include "support.hpp"

using namespace crewline;
using llm::ChatMessage;
using llm::Role;

namespace {

// independently assembled fingerprint: same contract, separate code path
std::string reference_fingerprint(const std::string& model,
                                  const std::vector<ChatMessage>& messages) {
    nlohmann::json doc;
    doc["model"] = model;
    doc["messages"] = nlohmann::json::array();
    for (const auto& m : messages) {
        doc["messages"].push_back(
            {{"role", llm::role_name(m.role)}, {"content", m.content}});
    }
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : doc.dump()) {
        h = (h ^ c) * 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

llm::LlmConfig replay_config(const std::string& transcript) {
    llm::LlmConfig cfg;
    cfg.provider = llm::Provider::replay;
    cfg.transcript_path = transcript;
    return cfg;
}

nlohmann::json random_json(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> kind(0, depth > 0 ? 5 : 3);
    switch (kind(rng)) {
        case 0: return nlohmann::json(static_cast<std::int64_t>(rng() % 100000));
        case 1: return nlohmann::json(rng() % 2 == 0);
        case 2: return nullptr;
        case 3: {
            static const std::vector<std::string> words = {
                "alpha", "with \"quotes\"", "brace { inside", "slash \\ back",
                "newline\nvalue", "bracket ] text", "", "café"};
            return nlohmann::json(words[rng() % words.size()]);
        }
        case 4: {
            nlohmann::json arr = nlohmann::json::array();
            std::size_t n = rng() % 4;
            for (std::size_t i = 0; i < n; ++i) {
                arr.push_back(random_json(rng, depth - 1));
            }
            return arr;
        }
        default: {
            nlohmann::json obj = nlohmann::json::object();
            std::size_t n = rng() % 4;
            for (std::size_t i = 0; i < n; ++i) {
                obj["k" + std::to_string(i)] = random_json(rng, depth - 1);
            }
            return obj;
        }
    }
}

std::string random_noise(std::mt19937_64& rng, std::size_t max_len) {
    // prose-like noise that cannot open a JSON region by itself
    static const std::string pool =
        "abcdefghijklmnopqrstuvwxyz ABCDEFGHIJKLMNOPQRSTUVWXYZ.,:;!?()-'\n\t";
    std::string out;
    std::size_t n = rng() % (max_len + 1);
    for (std::size_t i = 0; i < n; ++i) {
        out += pool[rng() % pool.size()];
    }
    return out;
}

std::string embed_json(std::mt19937_64& rng, const nlohmann::json& value) {
    std::string body = value.dump();
    switch (rng() % 3) {
        case 0: body = "```json\n" + body + "\n```"; break;
        case 1: body = "```\n" + body + "\n```"; break;
        default: break;
    }
    return random_noise(rng, 40) + body + random_noise(rng, 40);
}

}  // namespace

TEST_CASE("fingerprint is stable, hex, and sensitive to every input") {
    std::vector<ChatMessage> messages = {{Role::system, "be brief"}, {Role::user, "hello"}};
    std::string fp = llm::fingerprint("gpt-3.5", messages);
    CHECK(fp.size() == 16);
    CHECK(fp.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(fp == llm::fingerprint("gpt-3.5", messages));
    CHECK(fp == reference_fingerprint("gpt-3.5", messages));
    CHECK(fp != llm::fingerprint("gpt-4", messages));
    CHECK(fp != llm::fingerprint("gpt-3.5", {{Role::system, "be brief"}, {Role::user, "hullo"}}));
    CHECK(fp != llm::fingerprint("gpt-3.5", {{Role::user, "be brief"}, {Role::user, "hello"}}));
}

TEST_CASE("transcript files round-trip") {
    support::TempDir dir;
    std::string path = dir.file("t.jsonl");
    llm::append_transcript_entry(path, {"00000000000000aa", "first"});
    llm::append_transcript_entry(path, {"00000000000000bb", "second\nline"});
    auto entries = llm::load_transcript(path);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].fingerprint == "00000000000000aa");
    CHECK(entries[1].response == "second\nline");
    CHECK_THROWS_AS(llm::load_transcript(dir.file("missing.jsonl")), IoError);
}

TEST_CASE("replay gateway enforces strict order") {
    support::TempDir dir;
    std::string path = dir.file("t.jsonl");
    std::vector<ChatMessage> m1 = {{Role::user, "one"}};
    std::vector<ChatMessage> m2 = {{Role::user, "two"}};
    llm::append_transcript_entry(path, {llm::fingerprint("gpt-3.5", m1), "r1"});
    llm::append_transcript_entry(path, {llm::fingerprint("gpt-3.5", m2), "r2"});

    llm::ReplayGateway ok(replay_config(path));
    CHECK(ok.complete(m1) == "r1");
    CHECK(ok.complete(m2) == "r2");
    CHECK_THROWS_AS(ok.complete(m1), llm::ReplayExhausted);

    llm::ReplayGateway out_of_order(replay_config(path));
    CHECK_THROWS_AS(out_of_order.complete(m2), llm::ReplayMismatch);

    CHECK_THROWS_AS(llm::ReplayGateway(replay_config("")), ConfigError);
}

TEST_CASE("scripted record then replay closes the loop") {
    support::TempDir dir;
    std::string path = dir.file("t.jsonl");
    llm::LlmConfig rec = replay_config(path);
    rec.record = true;
    llm::ScriptedGateway scripted(rec, {"alpha", "beta"});
    std::vector<ChatMessage> m1 = {{Role::system, "s"}, {Role::user, "q1"}};
    std::vector<ChatMessage> m2 = {{Role::system, "s"}, {Role::user, "q2"}};
    CHECK(scripted.complete(m1) == "alpha");
    CHECK(scripted.complete(m2) == "beta");
    CHECK_THROWS_AS(scripted.complete(m1), llm::ReplayExhausted);

    llm::ReplayGateway replay(replay_config(path));
    CHECK(replay.complete(m1) == "alpha");
    CHECK(replay.complete(m2) == "beta");
}

TEST_CASE("extract_json finds the first balanced region") {
    CHECK(llm::extract_json(R"({"a": 1})") == nlohmann::json({{"a", 1}}));
    CHECK(llm::extract_json("[1, 2, 3]") == nlohmann::json({1, 2, 3}));
    CHECK(llm::extract_json("Sure! Here it is: {\"a\": [1, {\"b\": 2}]} hope that helps") ==
          nlohmann::json({{"a", {1, {{"b", 2}}}}}));
    CHECK(llm::extract_json("```json\n{\"x\": true}\n```") == nlohmann::json({{"x", true}}));
    CHECK(llm::extract_json("text ``` [1] ``` more") == nlohmann::json({1}));
    CHECK(llm::extract_json(R"({"s": "brace } in string"})") ==
          nlohmann::json({{"s", "brace } in string"}}));
    CHECK(llm::extract_json(R"({"s": "escaped \" quote }"})")["s"] == "escaped \" quote }");

    CHECK_THROWS_AS(llm::extract_json("no structured data here"), llm::NoJsonFound);
    CHECK_THROWS_AS(llm::extract_json(""), llm::NoJsonFound);
    CHECK_THROWS_AS(llm::extract_json("{\"a\": 1"), llm::JsonSyntax);
    CHECK_THROWS_AS(llm::extract_json("{a: 1}"), llm::JsonSyntax);
    CHECK_THROWS_AS(llm::extract_json("closers ] alone } find nothing"), llm::NoJsonFound);
}

TEST_CASE("extract_json recovers fuzz-embedded documents") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 300; ++i) {
        nlohmann::json value = rng() % 2 == 0 ? nlohmann::json::object() : random_json(rng, 2);
        if (!value.is_object() && !value.is_array()) {
            value = nlohmann::json::array({value});
        }
        std::string text = embed_json(rng, value);
        CAPTURE(text);
        CHECK(llm::extract_json(text) == value);
    }
}

TEST_CASE("http gateway retries on 5xx and honors the response schema") {
    std::atomic<int> requests{0};
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        int n = ++requests;
        auto body = nlohmann::json::parse(req.body);
        CHECK(body["model"] == "gpt-3.5");
        CHECK(body["messages"].size() == 1);
        if (n < 3) {
            res.status = 500;
            res.set_content("transient", "text/plain");
        } else {
            nlohmann::json ok = {
                {"choices", {{{"message", {{"role", "assistant"}, {"content", "ok"}}}}}}};
            res.set_content(ok.dump(), "application/json");
        }
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    support::TempDir dir;
    llm::LlmConfig cfg;
    cfg.provider = llm::Provider::local_chat;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.max_retries = 3;
    cfg.backoff_base = std::chrono::milliseconds(1);
    cfg.record = true;
    cfg.transcript_path = dir.file("rec.jsonl");

    std::vector<ChatMessage> messages = {{Role::user, "ping"}};
    llm::HttpGateway gateway(cfg);
    CHECK(gateway.complete(messages) == "ok");
    CHECK(requests.load() == 3);

    // the successful call was recorded and replays
    llm::ReplayGateway replay(replay_config(cfg.transcript_path));
    CHECK(replay.complete(messages) == "ok");

    server.stop();
    runner.join();
}

TEST_CASE("http gateway gives up after max retries and fails fast on 4xx") {
    std::atomic<int> requests{0};
    std::atomic<int> status{500};
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++requests;
        res.status = status.load();
        res.set_content("nope", "text/plain");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    llm::LlmConfig cfg;
    cfg.provider = llm::Provider::local_chat;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.max_retries = 1;
    cfg.backoff_base = std::chrono::milliseconds(1);
    llm::HttpGateway gateway(cfg);

    std::vector<ChatMessage> messages = {{Role::user, "ping"}};
    CHECK_THROWS_AS(gateway.complete(messages), llm::ProviderError);
    CHECK(requests.load() == 2);  // initial attempt plus one retry

    requests = 0;
    status = 404;
    CHECK_THROWS_AS(gateway.complete(messages), llm::ProviderError);
    CHECK(requests.load() == 1);  // client errors never retry

    server.stop();
    runner.join();
}

TEST_CASE("make_gateway selects providers") {
    support::TempDir dir;
    std::string path = dir.file("t.jsonl");
    support::write_file(path, "");
    CHECK(dynamic_cast<llm::ReplayGateway*>(llm::make_gateway(replay_config(path)).get()));
    llm::LlmConfig http;
    http.provider = llm::Provider::local_chat;
    http.base_url = "http://127.0.0.1:1";
    CHECK(dynamic_cast<llm::HttpGateway*>(llm::make_gateway(http).get()));
    http.base_url = "";
    CHECK_THROWS_AS(llm::make_gateway(http), ConfigError);
}

// ---- crew ----

namespace {

crew::Crew two_task_crew() {
    crew::Crew c;
    c.agents = {{"Scout", "find things", "knows the terrain"},
                {"Scribe", "write things down", "keeps the records"}};
    c.tasks = {{"List what you found", "Scout", crew::OutputKind::json_events, nullptr},
               {"Summarize the findings", "Scribe", crew::OutputKind::free_text, nullptr}};
    return c;
}

}  // namespace

TEST_CASE("build_prompt renders a fixed template") {
    crew::Agent agent{"Scout", "find things", "knows the terrain"};
    crew::Task task{"List what you found", "Scout", crew::OutputKind::free_text, nullptr};
    crew::Context context = {{"Area", "north field"}, {"Season", "spring"}};

    auto messages = crew::build_prompt(agent, task, context);
    REQUIRE(messages.size() == 2);
    CHECK(messages[0].role == Role::system);
    CHECK(messages[0].content ==
          "Role: Scout\nGoal: find things\nBackstory: knows the terrain");
    CHECK(messages[1].role == Role::user);
    CHECK(messages[1].content ==
          "List what you found\n\n### Area\nnorth field\n\n### Season\nspring\n\n"
          "Respond in plain prose.");

    // byte-stable across calls
    auto again = crew::build_prompt(agent, task, context);
    CHECK(again[0].content == messages[0].content);
    CHECK(again[1].content == messages[1].content);

    auto bare = crew::build_prompt(agent, task, {});
    CHECK(bare[1].content == "List what you found\n\nRespond in plain prose.");

    task.output_kind = crew::OutputKind::json_events;
    auto json_prompt = crew::build_prompt(agent, task, {});
    CHECK(json_prompt[1].content.find("JSON array of event objects") != std::string::npos);
    CHECK(json_prompt[1].content.find("article_id (string)") != std::string::npos);
}

TEST_CASE("build_prompt drops oldest context blocks under a token budget") {
    crew::Agent agent{"Scout", "g", "b"};
    crew::Task task{"describe", "Scout", crew::OutputKind::free_text, nullptr};
    crew::Context context = {{"Old", "one two three four five six seven eight"},
                             {"New", "nine ten"}};
    auto messages = crew::build_prompt(agent, task, context, 6);
    CHECK(messages[1].content.find("Old") == std::string::npos);
    CHECK(messages[1].content.find("### New\nnine ten") != std::string::npos);
}

TEST_CASE("run_crew passes prior raw outputs forward by agent role") {
    auto crew_def = two_task_crew();
    support::TempDir dir;
    llm::LlmConfig cfg = replay_config(dir.file("t.jsonl"));
    cfg.record = true;
    llm::ScriptedGateway gateway(cfg, {"[{\"found\": 1}]", "summary text"});

    crew::Context initial = {{"Terrain", "hills"}};
    auto result = crew::run_crew(crew_def, gateway, initial);
    REQUIRE(result.per_task.size() == 2);
    CHECK(result.per_task[0].raw == "[{\"found\": 1}]");
    REQUIRE(result.per_task[0].parsed.has_value());
    CHECK((*result.per_task[0].parsed)[0]["found"] == 1);
    CHECK(result.final().raw == "summary text");
    CHECK_FALSE(result.final().parsed.has_value());

    // the recorded fingerprints prove exactly which prompts were sent
    auto entries = llm::load_transcript(cfg.transcript_path);
    REQUIRE(entries.size() == 2);
    auto p1 = crew::build_prompt(crew_def.agents[0], crew_def.tasks[0], initial,
                                 crew_def.context_token_budget);
    CHECK(entries[0].fingerprint == llm::fingerprint(cfg.model, p1));
    crew::Context second = initial;
    second.emplace_back("Scout", "[{\"found\": 1}]");
    auto p2 = crew::build_prompt(crew_def.agents[1], crew_def.tasks[1], second,
                                 crew_def.context_token_budget);
    CHECK(entries[1].fingerprint == llm::fingerprint(cfg.model, p2));
}

TEST_CASE("run_crew retries bad JSON once then fails fast") {
    auto crew_def = two_task_crew();
    llm::LlmConfig cfg;

    SUBCASE("bad then good recovers") {
        llm::ScriptedGateway gateway(cfg, {"not json at all", "[{\"ok\": true}]", "done"});
        auto result = crew::run_crew(crew_def, gateway, {});
        CHECK(result.per_task[0].raw == "[{\"ok\": true}]");
        CHECK((*result.per_task[0].parsed)[0]["ok"] == true);
    }
    SUBCASE("bad twice fails with the task index") {
        llm::ScriptedGateway gateway(cfg, {"still no json", "worse"});
        try {
            crew::run_crew(crew_def, gateway, {});
            FAIL("expected TaskFailed");
        } catch (const crew::TaskFailed& e) {
            CHECK(e.task_index() == 0);
        }
    }
    SUBCASE("gateway errors surface as TaskFailed") {
        llm::ScriptedGateway gateway(cfg, {"[{}]"});
        try {
            crew::run_crew(crew_def, gateway, {});  // second task has no response left
            FAIL("expected TaskFailed");
        } catch (const crew::TaskFailed& e) {
            CHECK(e.task_index() == 1);
        }
    }
}

TEST_CASE("run_crew validates the crew definition") {
    llm::LlmConfig cfg;
    llm::ScriptedGateway gateway(cfg, {});
    auto crew_def = two_task_crew();
    crew_def.process = "parallel";
    CHECK_THROWS_AS(crew::run_crew(crew_def, gateway, {}), ConfigError);

    crew_def = two_task_crew();
    crew_def.tasks[1].agent_role = "Nobody";
    CHECK_THROWS_AS(crew::run_crew(crew_def, gateway, {}), ConfigError);

    crew_def = two_task_crew();
    crew_def.tasks[0].description = "";
    CHECK_THROWS_AS(crew::run_crew(crew_def, gateway, {}), ConfigError);
}

TEST_CASE("crew definitions round-trip through JSON") {
    auto crew_def = two_task_crew();
    auto doc = crew::crew_to_json(crew_def);
    auto restored = crew::crew_from_json(doc);
    REQUIRE(restored.agents.size() == 2);
    CHECK(restored.agents[1].backstory == "keeps the records");
    REQUIRE(restored.tasks.size() == 2);
    CHECK(restored.tasks[0].output_kind == crew::OutputKind::json_events);
    CHECK(crew::crew_to_json(restored) == doc);

    doc["tasks"][0]["agent_role"] = "Ghost";
    CHECK_THROWS_AS(crew::crew_from_json(doc), ConfigError);
}
