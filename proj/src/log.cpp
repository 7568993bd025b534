#include "crewline/log.hpp"

#include <chrono>
#include <ctime>

namespace crewline::log {

namespace {

std::string level_name(Level level) {
    switch (level) {
        case Level::error: return "error";
        case Level::info: return "info";
        case Level::debug: return "debug";
    }
    return "info";
}

std::string now_iso() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void JsonlLogger::write(Level level, const std::string& event,
                        nlohmann::ordered_json fields) {
    if (static_cast<int>(level) > verbosity_ + 1) {
        return;
    }
    nlohmann::ordered_json line;
    line["ts"] = now_iso();
    line["level"] = level_name(level);
    line["event"] = event;
    for (auto& [key, value] : fields.items()) {
        line[key] = std::move(value);
    }
    out_ << line.dump() << "\n";
    out_.flush();
}

}  // namespace crewline::log
