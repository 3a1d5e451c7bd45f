#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace verirag {

// Malformed input document (missing keys, wrong types, out-of-domain values).
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller violated an operation's precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Referential-integrity or duplicate-id failure while loading a corpus manifest.
class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An LLM response did not match its expected structure. Retryable.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Transport-level failure talking to a provider (after retries were exhausted).
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PromptTooLargeError : public std::runtime_error {
public:
    PromptTooLargeError(const std::string& what, std::vector<std::string> oversized)
        : std::runtime_error(what), oversized_(std::move(oversized)) {}

    const std::vector<std::string>& oversized_papers() const noexcept { return oversized_; }

private:
    std::vector<std::string> oversized_;
};

} // namespace verirag
