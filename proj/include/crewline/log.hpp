#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

namespace crewline::log {

enum class Level { error = 0, info = 1, debug = 2 };

/// One JSON object per line: {"ts": ..., "level": ..., "event": ..., ...}.
/// Messages above the configured verbosity are dropped.
class JsonlLogger {
public:
    JsonlLogger(std::ostream& out, int verbosity) : out_(out), verbosity_(verbosity) {}

    void write(Level level, const std::string& event,
               nlohmann::ordered_json fields = nlohmann::ordered_json::object());

    void info(const std::string& event,
              nlohmann::ordered_json fields = nlohmann::ordered_json::object()) {
        write(Level::info, event, std::move(fields));
    }
    void error(const std::string& event,
               nlohmann::ordered_json fields = nlohmann::ordered_json::object()) {
        write(Level::error, event, std::move(fields));
    }
    void debug(const std::string& event,
               nlohmann::ordered_json fields = nlohmann::ordered_json::object()) {
        write(Level::debug, event, std::move(fields));
    }

private:
    std::ostream& out_;
    int verbosity_;
};

}  // namespace crewline::log
