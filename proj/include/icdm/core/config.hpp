#pragma once

#include "icdm/core/error.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <string>

namespace icdm {

/// Reads fields of one JSON object. Type errors and, on finish(), unknown
/// keys raise ConfigError naming the dotted field path.
class ConfigReader {
public:
    ConfigReader(const nlohmann::json& object, std::string path) : object_(object), path_(std::move(path))
    {
        if (!object_.is_object()) {
            throw ConfigError(path_.empty() ? "<root>" : path_, "must be a JSON object");
        }
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return object_.contains(key); }

    /// Overwrites `out` when `key` is present.
    template <class T>
    void read(const std::string& key, T& out)
    {
        used_.insert(key);
        if (!object_.contains(key)) {
            return;
        }
        try {
            out = object_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(field(key), std::string("wrong type: ") + e.what());
        }
    }

    template <class T>
    T required(const std::string& key)
    {
        if (!object_.contains(key)) {
            throw ConfigError(field(key), "missing required field");
        }
        T out{};
        read(key, out);
        return out;
    }

    /// The sub-object at `key`, or null when absent.
    const nlohmann::json* child(const std::string& key)
    {
        used_.insert(key);
        return object_.contains(key) ? &object_.at(key) : nullptr;
    }

    void finish() const
    {
        for (const auto& [key, value] : object_.items()) {
            if (!used_.count(key)) {
                throw ConfigError(field(key), "unknown field");
            }
        }
    }

private:
    const nlohmann::json& object_;
    std::string path_;
    std::set<std::string> used_;
};

} // namespace icdm
