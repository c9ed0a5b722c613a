#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace retsyn {

// Hard failures carry a category so the CLI can map them to exit codes.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(std::size_t line_no, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
    std::size_t line;
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> violation_list)
        : std::runtime_error(join(violation_list)), violations(std::move(violation_list)) {}
    std::vector<std::string> violations;

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid configuration:";
        for (const auto& s : v) out += "\n  - " + s;
        return out;
    }
};

struct UpstreamError : std::runtime_error {
    UpstreamError(const std::string& stage, const std::string& what)
        : std::runtime_error(what), missing_stage(stage) {}
    std::string missing_stage;
};

struct BackendFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Recoverable backend outcome, used where a failure is data, not control flow.
enum class BackendErrorKind { None, Transport, HttpStatus, MalformedBody, Unavailable };

struct BackendError {
    BackendErrorKind kind = BackendErrorKind::None;
    int http_status = 0;
    std::string message;
    bool retryable = false;
};

template <class T>
class Expected {
  public:
    Expected(T value) : value_(std::move(value)) {}
    Expected(BackendError err) : error_(std::move(err)) {}

    bool ok() const { return value_.has_value(); }
    explicit operator bool() const { return ok(); }

    const T& value() const& { return *value_; }
    T& value() & { return *value_; }
    T&& take() { return std::move(*value_); }

    const BackendError& error() const { return error_; }

  private:
    std::optional<T> value_;
    BackendError error_;
};

}  // namespace retsyn
