#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crewline/errors.hpp"

namespace crewline::llm {

enum class Provider { remote_chat, local_chat, replay };
enum class Role { system, user, assistant };

std::string role_name(Role role);

struct ChatMessage {
    Role role = Role::user;
    std::string content;
};

struct LlmConfig {
    Provider provider = Provider::replay;
    std::string model = "gpt-3.5";
    std::string base_url;  // e.g. http://localhost:11434
    double temperature = 0.0;
    int max_output_tokens = 2048;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1000};
    int max_concurrent = 4;
    std::string transcript_path;  // replay source, or record sink
    bool record = false;
    std::string api_key_env = "CREWLINE_API_KEY";
};

/// Stable request fingerprint over (model, messages); timestamps and
/// transport settings are deliberately excluded so transcripts survive
/// reruns.
std::string fingerprint(const std::string& model, const std::vector<ChatMessage>& messages);

struct TranscriptEntry {
    std::string fingerprint;
    std::string response;
};

std::vector<TranscriptEntry> load_transcript(const std::string& path);
void append_transcript_entry(const std::string& path, const TranscriptEntry& entry);

class Gateway {
public:
    virtual ~Gateway() = default;

    /// Sends one chat completion; returns assistant text.
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;

    virtual const LlmConfig& config() const = 0;
};

/// Replays a recorded transcript strictly in order; a fingerprint mismatch
/// is an error, never a silent skip.
class ReplayGateway : public Gateway {
public:
    explicit ReplayGateway(LlmConfig config);
    std::string complete(const std::vector<ChatMessage>& messages) override;
    const LlmConfig& config() const override { return config_; }
    std::size_t cursor() const { return cursor_; }

private:
    LlmConfig config_;
    std::vector<TranscriptEntry> entries_;
    std::size_t cursor_ = 0;
    std::mutex mutex_;
};

/// Serves canned responses in order while recording proper fingerprints;
/// used to script transcripts and in tests.
class ScriptedGateway : public Gateway {
public:
    ScriptedGateway(LlmConfig config, std::vector<std::string> responses);
    std::string complete(const std::vector<ChatMessage>& messages) override;
    const LlmConfig& config() const override { return config_; }

private:
    LlmConfig config_;
    std::vector<std::string> responses_;
    std::size_t cursor_ = 0;
    std::mutex mutex_;
};

/// OpenAI-compatible HTTP chat endpoint with retry/backoff and optional
/// transcript recording.
class HttpGateway : public Gateway {
public:
    explicit HttpGateway(LlmConfig config);
    std::string complete(const std::vector<ChatMessage>& messages) override;
    const LlmConfig& config() const override { return config_; }

private:
    LlmConfig config_;
    std::mutex record_mutex_;
};

std::unique_ptr<Gateway> make_gateway(const LlmConfig& config);

/// Builds the chat-completions request body for (config, messages).
nlohmann::json request_body(const LlmConfig& config, const std::vector<ChatMessage>& messages);

/// Finds and strictly parses the first balanced JSON object or array in
/// model output, tolerating Markdown code fences and surrounding prose.
nlohmann::json extract_json(const std::string& text);

}  // namespace crewline::llm
