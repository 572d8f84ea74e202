#pragma once

#include "icdm/rollout/policy.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <memory>
#include <string>

namespace icdm::rollout {

/// Where an external policy lives: "tcp://host:port" (also "tcp:host:port")
/// or "exec:<shell command>" for a child process speaking on stdin/stdout.
struct Endpoint {
    enum class Kind { tcp, exec };
    Kind kind = Kind::tcp;
    std::string host;
    int port = 0;
    std::string command;

    static Endpoint parse(const std::string& text);
    std::string to_string() const;
};

struct ExternalOptions {
    std::chrono::milliseconds timeout{60000};
    /// Extra attempts after a timeout or a broken connection.
    int retries = 0;
};

/// Sends one newline-terminated line and returns the next reply line
/// (without the newline). Throws Timeout, or Error when the peer is gone.
class LineTransport {
public:
    virtual ~LineTransport() = default;
    virtual std::string exchange(const std::string& line, std::chrono::milliseconds timeout) = 0;
};

std::unique_ptr<LineTransport> open_transport(const Endpoint& endpoint);

/// Request object for decision t:
///   {"task_id", "step" (1-based), "context", "history": [{"obs","action","reward"}...],
///    "current_obs", "num_actions"}
nlohmann::json make_request(const DecisionContext& ctx);

/// Parses {"action": <integer>}. Throws ProtocolError for malformed replies and
/// InvalidAction for integers outside [0, num_actions).
int parse_reply(const std::string& line, std::size_t num_actions);

/// One protocol round-trip over an open transport.
int external_policy_query(LineTransport& transport, const DecisionContext& ctx, std::chrono::milliseconds timeout);

/// Policy backed by an external process or server. Each instance owns its
/// own connection, so concurrent rollouts use separate instances.
class ExternalPolicy : public Policy {
public:
    ExternalPolicy(Endpoint endpoint, ExternalOptions options);
    int act(const DecisionContext& ctx) override;
    std::string name() const override { return "external:" + endpoint_.to_string(); }

private:
    Endpoint endpoint_;
    ExternalOptions options_;
    std::unique_ptr<LineTransport> transport_;
};

} // namespace icdm::rollout
