#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agentkit {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A serialized record could not be parsed. `offset` is the byte offset into the
// input (or file) where parsing failed.
class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t offset, const std::string& what)
        : Error("malformed record at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// A value parsed or constructed successfully but breaks a documented invariant.
class InvariantViolation : public Error {
public:
    InvariantViolation(std::string invariant, const std::string& detail)
        : Error("invariant violated [" + invariant + "]: " + detail), invariant_(std::move(invariant)) {}
    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

class FixtureError : public Error {
public:
    FixtureError(std::string task_id, const std::string& detail)
        : Error("fixture " + task_id + ": " + detail), task_id_(std::move(task_id)) {}
    const std::string& task_id() const noexcept { return task_id_; }

private:
    std::string task_id_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Remote provider (model, embedding, summarizer, judge) could not be reached.
class ProviderUnavailable : public Error {
public:
    using Error::Error;
};

// Provider answered but the answer was unusable.
class ProviderError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ZeroVector : public Error {
public:
    using Error::Error;
};

class TooFewScores : public Error {
public:
    using Error::Error;
};

class InsufficientHistory : public Error {
public:
    using Error::Error;
};

class DuplicateName : public Error {
public:
    using Error::Error;
};

class InvalidSchema : public Error {
public:
    using Error::Error;
};

class TaskMismatch : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

}  // namespace agentkit
