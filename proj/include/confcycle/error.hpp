#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace confcycle {

/// Raised for configuration problems: unknown keys, malformed or out-of-range
/// values, missing fields. Always names the offending field.
class ConfigError : public std::runtime_error {
public:
    enum class Kind { UnknownKey, Malformed, OutOfRange, Missing, Duplicate };

    ConfigError(Kind kind, std::string field, const std::string& detail)
        : std::runtime_error(describe(kind, field, detail)), kind_(kind), field_(std::move(field)) {}

    Kind kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string describe(Kind kind, const std::string& field, const std::string& detail) {
        std::string head;
        switch (kind) {
        case Kind::UnknownKey: head = "unknown key"; break;
        case Kind::Malformed: head = "malformed value for"; break;
        case Kind::OutOfRange: head = "value out of range for"; break;
        case Kind::Missing: head = "missing required field"; break;
        case Kind::Duplicate: head = "duplicate key"; break;
        }
        std::string msg = head + " '" + field + "'";
        if (!detail.empty()) msg += ": " + detail;
        return msg;
    }

    Kind kind_;
    std::string field_;
};

/// Numerical failure inside the simulation engine (equilibrium or capital
/// fixed point did not converge). Carries the period where it happened, or -1
/// when raised outside a run.
class EngineError : public std::runtime_error {
public:
    explicit EngineError(const std::string& what, std::int64_t period = -1)
        : std::runtime_error(period >= 0 ? what + " (period " + std::to_string(period) + ")" : what),
          period_(period) {}

    std::int64_t period() const noexcept { return period_; }

private:
    std::int64_t period_;
};

} // namespace confcycle
