#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace icdm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model violates a stochasticity or dimension invariant.
class ModelError : public Error {
public:
    using Error::Error;
};

/// An observation has zero predictive probability under the model.
class ZeroLikelihood : public Error {
public:
    using Error::Error;
};

/// KL divergence requested where p has mass outside the support of q.
class Unsupported : public Error {
public:
    using Error::Error;
};

class SamplingExhausted : public Error {
public:
    using Error::Error;
};

/// The belief solver memo table outgrew its node budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class Timeout : public Error {
public:
    using Error::Error;
};

/// An external policy replied with an action outside the task's action space.
class InvalidAction : public Error {
public:
    InvalidAction(const std::string& what, long long action)
        : Error(what), action_(action) {}
    long long action() const noexcept { return action_; }

private:
    long long action_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class IllConditioned : public Error {
public:
    using Error::Error;
};

class Diverged : public Error {
public:
    using Error::Error;
};

class DegenerateOptimum : public Error {
public:
    using Error::Error;
};

/// Invalid user configuration; `field` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)), message_(what) {}
    const std::string& field() const noexcept { return field_; }
    /// The complaint without the field name.
    const std::string& message() const noexcept { return message_; }

private:
    std::string field_;
    std::string message_;
};

} // namespace icdm
