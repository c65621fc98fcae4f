#pragma once

#include <stdexcept>
#include <string>

namespace porogen {

/// Bad arguments, malformed configs, shape mismatches. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced NaN/Inf losses. CLI exit code 2.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
    long step() const { return step_; }
private:
    long step_;
};

/// A stage was invoked before the stage that produces its inputs. CLI exit code 3.
class MissingPrerequisiteError : public std::runtime_error {
public:
    MissingPrerequisiteError(const std::string& what, const std::string& producing_stage)
        : std::runtime_error(what + " (run '" + producing_stage + "' first)"),
          producing_stage_(producing_stage) {}
    const std::string& producing_stage() const { return producing_stage_; }
private:
    std::string producing_stage_;
};

/// Using a model before it was trained/loaded.
class StateError : public std::runtime_error {
public:
    explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace porogen
