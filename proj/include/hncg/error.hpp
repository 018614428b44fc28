#pragma once

#include <stdexcept>
#include <string>

namespace hncg {

// Exit codes used by the command-line tool.
enum class ErrorKind { validation = 2, plug = 3, numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

    // Pipeline stage that raised the error, empty outside the pipeline.
    const std::string& stage() const noexcept { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

private:
    ErrorKind kind_;
    std::string stage_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class PlugError : public Error {
public:
    enum class Reason { launch_failed, exit_status, timeout, dimension_mismatch, unreadable_output };

    PlugError(Reason reason, const std::string& what, int exit_status = 0)
        : Error(ErrorKind::plug, what), reason_(reason), exit_status_(exit_status) {}

    Reason reason() const noexcept { return reason_; }
    // Only meaningful for Reason::exit_status.
    int exit_status() const noexcept { return exit_status_; }

private:
    Reason reason_;
    int exit_status_;
};

}  // namespace hncg
