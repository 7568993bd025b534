#include "crewline/llm.hpp"

#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>

#include "crewline/textutil.hpp"

namespace crewline::llm {

std::string role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

std::string fingerprint(const std::string& model, const std::vector<ChatMessage>& messages) {
    nlohmann::json doc;
    doc["model"] = model;
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) {
        msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    doc["messages"] = std::move(msgs);
    std::string bytes = doc.dump();

    std::uint64_t h = 14695981039346656037ULL;  // FNV-1a 64 offset basis
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<TranscriptEntry> load_transcript(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read transcript: " + path);
    }
    std::vector<TranscriptEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) {
            continue;
        }
        nlohmann::json doc = nlohmann::json::parse(line);
        entries.push_back(TranscriptEntry{doc.at("fingerprint").get<std::string>(),
                                          doc.at("response").get<std::string>()});
    }
    return entries;
}

void append_transcript_entry(const std::string& path, const TranscriptEntry& entry) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) {
        throw IoError("cannot write transcript: " + path);
    }
    nlohmann::json doc;
    doc["fingerprint"] = entry.fingerprint;
    doc["response"] = entry.response;
    out << doc.dump() << "\n";
}

ReplayGateway::ReplayGateway(LlmConfig config) : config_(std::move(config)) {
    if (config_.transcript_path.empty()) {
        throw ConfigError("replay provider requires a transcript path");
    }
    entries_ = load_transcript(config_.transcript_path);
}

std::string ReplayGateway::complete(const std::vector<ChatMessage>& messages) {
    std::lock_guard lock(mutex_);
    if (cursor_ >= entries_.size()) {
        throw ReplayExhausted();
    }
    std::string fp = fingerprint(config_.model, messages);
    const auto& entry = entries_[cursor_];
    if (entry.fingerprint != fp) {
        throw ReplayMismatch(entry.fingerprint, fp);
    }
    ++cursor_;
    return entry.response;
}

ScriptedGateway::ScriptedGateway(LlmConfig config, std::vector<std::string> responses)
    : config_(std::move(config)), responses_(std::move(responses)) {}

std::string ScriptedGateway::complete(const std::vector<ChatMessage>& messages) {
    std::lock_guard lock(mutex_);
    if (cursor_ >= responses_.size()) {
        throw ReplayExhausted();
    }
    std::string response = responses_[cursor_++];
    if (config_.record && !config_.transcript_path.empty()) {
        append_transcript_entry(config_.transcript_path,
                                TranscriptEntry{fingerprint(config_.model, messages), response});
    }
    return response;
}

nlohmann::json request_body(const LlmConfig& config, const std::vector<ChatMessage>& messages) {
    nlohmann::json body;
    body["model"] = config.model;
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) {
        msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    body["messages"] = std::move(msgs);
    body["temperature"] = config.temperature;
    body["max_tokens"] = config.max_output_tokens;
    return body;
}

namespace {

// Bounds simultaneous in-flight requests per gateway.
class Semaphore {
public:
    explicit Semaphore(int count) : count_(count) {}
    void acquire() {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return count_ > 0; });
        --count_;
    }
    void release() {
        std::lock_guard lock(m_);
        ++count_;
        cv_.notify_one();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    int count_;
};

Semaphore& inflight_limiter(int limit) {
    static Semaphore sem(limit > 0 ? limit : 4);
    return sem;
}

}  // namespace

HttpGateway::HttpGateway(LlmConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        throw ConfigError("http gateway requires base_url");
    }
}

std::string HttpGateway::complete(const std::vector<ChatMessage>& messages) {
    auto& limiter = inflight_limiter(config_.max_concurrent);
    limiter.acquire();
    struct Release {
        Semaphore& s;
        ~Release() { s.release(); }
    } release{limiter};

    httplib::Client client(config_.base_url);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(secs.count() > 0 ? secs.count() : 1, 0);
    client.set_read_timeout(secs.count() > 0 ? secs.count() : 1, 0);

    httplib::Headers headers;
    if (config_.provider == Provider::remote_chat) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    std::string payload = request_body(config_, messages).dump();

    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::string last_error;
    int last_status = 0;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            auto base = config_.backoff_base * (1LL << (attempt - 1));
            std::uniform_int_distribution<long long> jitter(0, std::max<long long>(1, base.count() / 2));
            std::this_thread::sleep_for(base + std::chrono::milliseconds(jitter(rng)));
        }
        auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            last_status = 0;
            continue;  // transport error, retry
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = res->body.substr(0, 200);
            last_status = res->status;
            continue;
        }
        if (res->status != 200) {
            throw ProviderError(res->status, res->body.substr(0, 200));
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError(res->status, std::string("bad response body: ") + e.what());
        }
        std::string content = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        if (config_.record && !config_.transcript_path.empty()) {
            std::lock_guard lock(record_mutex_);
            append_transcript_entry(
                config_.transcript_path,
                TranscriptEntry{fingerprint(config_.model, messages), content});
        }
        return content;
    }
    if (last_status == 0 && last_error.find("imeout") != std::string::npos) {
        throw TimeoutError("request timed out after retries: " + last_error);
    }
    throw ProviderError(last_status, last_error);
}

std::unique_ptr<Gateway> make_gateway(const LlmConfig& config) {
    switch (config.provider) {
        case Provider::replay:
            return std::make_unique<ReplayGateway>(config);
        case Provider::remote_chat:
        case Provider::local_chat:
            return std::make_unique<HttpGateway>(config);
    }
    throw ConfigError("unknown provider");
}

namespace {

std::string strip_code_fences(const std::string& text_in) {
    if (text_in.find("```") == std::string::npos) {
        return text_in;
    }
    std::string out;
    out.reserve(text_in.size());
    std::size_t i = 0;
    while (i < text_in.size()) {
        if (text_in.compare(i, 3, "```") == 0) {
            i += 3;
            // optional language tag up to end of line
            while (i < text_in.size() && text_in[i] != '\n' &&
                   (std::isalnum(static_cast<unsigned char>(text_in[i])) != 0)) {
                ++i;
            }
        } else {
            out += text_in[i++];
        }
    }
    return out;
}

}  // namespace

nlohmann::json extract_json(const std::string& text_in) {
    std::string s = strip_code_fences(text_in);
    auto start = s.find_first_of("{[");
    if (start == std::string::npos) {
        throw NoJsonFound();
    }
    std::size_t depth = 0;
    bool in_string = false;
    bool escape = false;
    std::size_t end = std::string::npos;
    for (std::size_t i = start; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (escape) {
                escape = false;
            } else if (c == '\\') {
                escape = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{' || c == '[') {
            ++depth;
        } else if (c == '}' || c == ']') {
            if (depth == 0) {
                throw JsonSyntax(i, "unbalanced closing bracket");
            }
            --depth;
            if (depth == 0) {
                end = i + 1;
                break;
            }
        }
    }
    if (end == std::string::npos) {
        throw JsonSyntax(start, "unterminated JSON region");
    }
    try {
        return nlohmann::json::parse(s.substr(start, end - start));
    } catch (const nlohmann::json::parse_error& e) {
        throw JsonSyntax(start + static_cast<std::size_t>(e.byte), e.what());
    }
}

}  // namespace crewline::llm
