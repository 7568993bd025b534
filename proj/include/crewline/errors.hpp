#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crewline {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

namespace ingest {

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t block_index, const std::string& what)
        : Error("malformed record in block " + std::to_string(block_index) + ": " + what),
          block_index_(block_index) {}
    std::size_t block_index() const { return block_index_; }

private:
    std::size_t block_index_;
};

class BadSiren : public Error {
public:
    BadSiren(std::size_t row, const std::string& value)
        : Error("row " + std::to_string(row) + ": bad SIREN '" + value + "' (expected 9 digits)"),
          row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

class HeaderMismatch : public Error {
public:
    using Error::Error;
};

class OrphanReview : public Error {
public:
    using Error::Error;
};

class UnparsableMoney : public Error {
public:
    explicit UnparsableMoney(const std::string& text)
        : Error("unparsable money amount: '" + text + "'") {}
};

class UnparsableDate : public Error {
public:
    explicit UnparsableDate(const std::string& text)
        : Error("unparsable date: '" + text + "'") {}
};

}  // namespace ingest

namespace retrieval {

class BadParams : public Error {
public:
    using Error::Error;
};

class DuplicateChunk : public Error {
public:
    using Error::Error;
};

}  // namespace retrieval

namespace llm {

class ProviderError : public Error {
public:
    ProviderError(int status, const std::string& body_excerpt)
        : Error("provider error, status " + std::to_string(status) + ": " + body_excerpt),
          status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

class TimeoutError : public Error {
public:
    using Error::Error;
};

class ReplayMismatch : public Error {
public:
    ReplayMismatch(const std::string& expected, const std::string& got)
        : Error("replay fingerprint mismatch: transcript has " + expected + ", request is " + got),
          expected_(expected),
          got_(got) {}
    const std::string& expected() const { return expected_; }
    const std::string& got() const { return got_; }

private:
    std::string expected_;
    std::string got_;
};

class ReplayExhausted : public Error {
public:
    ReplayExhausted() : Error("replay transcript exhausted") {}
};

class NoJsonFound : public Error {
public:
    NoJsonFound() : Error("no JSON object or array found in model output") {}
};

class JsonSyntax : public Error {
public:
    JsonSyntax(std::size_t position, const std::string& what)
        : Error("JSON syntax error at offset " + std::to_string(position) + ": " + what),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

}  // namespace llm

namespace crew {

class TaskFailed : public Error {
public:
    TaskFailed(std::size_t task_index, const std::string& cause)
        : Error("task " + std::to_string(task_index) + " failed: " + cause),
          task_index_(task_index),
          cause_(cause) {}
    std::size_t task_index() const { return task_index_; }
    const std::string& cause() const { return cause_; }

private:
    std::size_t task_index_;
    std::string cause_;
};

}  // namespace crew

}  // namespace crewline
