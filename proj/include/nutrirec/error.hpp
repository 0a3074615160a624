#pragma once

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nutrirec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

struct FieldError {
    std::string field;
    std::string message;
};

/// Input that violates a documented precondition or invariant.
/// Carries one entry per offending field when the caller can act on it.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error(message) {}

    explicit ValidationError(std::vector<FieldError> fields)
        : Error(summarize(fields)), fields_(std::move(fields)) {}

    ValidationError(std::initializer_list<FieldError> fields)
        : ValidationError(std::vector<FieldError>(fields)) {}

    const std::vector<FieldError>& fields() const noexcept { return fields_; }

private:
    static std::string summarize(const std::vector<FieldError>& fields) {
        std::string out = "validation failed:";
        for (const auto& f : fields) {
            out += " ";
            out += f.field;
            out += ": ";
            out += f.message;
            out += ";";
        }
        return out;
    }

    std::vector<FieldError> fields_;
};

/// File or stream that could not be read or parsed.
class LoadError : public Error {
public:
    explicit LoadError(const std::string& message) : Error(message) {}
};

}  // namespace nutrirec
