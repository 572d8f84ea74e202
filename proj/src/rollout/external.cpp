#include "icdm/rollout/external.hpp"

#include "icdm/core/error.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace icdm::rollout {

Endpoint Endpoint::parse(const std::string& text)
{
    Endpoint ep;
    if (text.rfind("exec:", 0) == 0) {
        ep.kind = Kind::exec;
        ep.command = text.substr(5);
        if (ep.command.empty()) {
            throw ConfigError("endpoint", "empty exec command");
        }
        return ep;
    }
    std::string rest;
    if (text.rfind("tcp://", 0) == 0) {
        rest = text.substr(6);
    } else if (text.rfind("tcp:", 0) == 0) {
        rest = text.substr(4);
    } else {
        throw ConfigError("endpoint", "expected tcp://host:port or exec:<command>, got '" + text + "'");
    }
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0) {
        throw ConfigError("endpoint", "missing host or port in '" + text + "'");
    }
    ep.kind = Kind::tcp;
    ep.host = rest.substr(0, colon);
    try {
        ep.port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("endpoint", "bad port in '" + text + "'");
    }
    if (ep.port <= 0 || ep.port > 65535) {
        throw ConfigError("endpoint", "port out of range in '" + text + "'");
    }
    return ep;
}

std::string Endpoint::to_string() const
{
    if (kind == Kind::exec) {
        return "exec:" + command;
    }
    return "tcp://" + host + ":" + std::to_string(port);
}

namespace {

/// Reads from `fd` until a newline, buffering any surplus for the next call.
class LineReader {
public:
    std::string read_line(int fd, std::chrono::milliseconds timeout)
    {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                return line;
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) {
                throw Timeout("external policy did not reply in time");
            }
            pollfd pfd{fd, POLLIN, 0};
            const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
            if (ready < 0 && errno == EINTR) {
                continue;
            }
            if (ready < 0) {
                throw Error(std::string("poll failed: ") + std::strerror(errno));
            }
            if (ready == 0) {
                throw Timeout("external policy did not reply in time");
            }
            char chunk[4096];
            const auto n = ::read(fd, chunk, sizeof chunk);
            if (n < 0 && errno == EINTR) {
                continue;
            }
            if (n <= 0) {
                throw Error("external policy closed the connection");
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    std::string buffer_;
};

void write_all(int fd, const std::string& data, bool socket)
{
    std::size_t sent = 0;
    while (sent < data.size()) {
        const auto n = socket ? ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL)
                              : ::write(fd, data.data() + sent, data.size() - sent);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            throw Error(std::string("cannot write to external policy: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(n);
    }
}

class TcpTransport : public LineTransport {
public:
    TcpTransport(const std::string& host, int port)
    {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        const auto service = std::to_string(port);
        if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
            throw Error("cannot resolve " + host + ": " + ::gai_strerror(rc));
        }
        for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
            fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd_ < 0) {
                continue;
            }
            if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) {
                break;
            }
            ::close(fd_);
            fd_ = -1;
        }
        ::freeaddrinfo(res);
        if (fd_ < 0) {
            throw Error("cannot connect to " + host + ":" + service);
        }
    }
    ~TcpTransport() override
    {
        if (fd_ >= 0) {
            ::close(fd_);
        }
    }

    std::string exchange(const std::string& line, std::chrono::milliseconds timeout) override
    {
        write_all(fd_, line + "\n", true);
        return reader_.read_line(fd_, timeout);
    }

private:
    int fd_ = -1;
    LineReader reader_;
};

class ProcessTransport : public LineTransport {
public:
    explicit ProcessTransport(const std::string& command)
    {
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2];
        int from_child[2];
        if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0) {
            throw Error("cannot create pipes for external policy");
        }
        pid_ = ::fork();
        if (pid_ < 0) {
            throw Error("cannot fork external policy");
        }
        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        in_ = to_child[1];
        out_ = from_child[0];
    }
    ~ProcessTransport() override
    {
        ::close(in_);
        ::close(out_);
        int status = 0;
        if (::waitpid(pid_, &status, WNOHANG) == 0) {
            ::kill(pid_, SIGTERM);
            ::waitpid(pid_, &status, 0);
        }
    }

    std::string exchange(const std::string& line, std::chrono::milliseconds timeout) override
    {
        write_all(in_, line + "\n", false);
        return reader_.read_line(out_, timeout);
    }

private:
    pid_t pid_ = -1;
    int in_ = -1;
    int out_ = -1;
    LineReader reader_;
};

} // namespace

std::unique_ptr<LineTransport> open_transport(const Endpoint& endpoint)
{
    if (endpoint.kind == Endpoint::Kind::exec) {
        return std::make_unique<ProcessTransport>(endpoint.command);
    }
    return std::make_unique<TcpTransport>(endpoint.host, endpoint.port);
}

nlohmann::json make_request(const DecisionContext& ctx)
{
    auto history = nlohmann::json::array();
    for (const auto& step : ctx.history.steps) {
        history.push_back({{"obs", step.obs}, {"action", step.action}, {"reward", step.reward}});
    }
    return {{"task_id", ctx.task.id},
            {"step", ctx.t + 1},
            {"context", ctx.context ? ctx.context->encoded : std::string()},
            {"history", std::move(history)},
            {"current_obs", ctx.obs},
            {"num_actions", ctx.task.num_actions()}};
}

int parse_reply(const std::string& line, std::size_t num_actions)
{
    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError("reply is not JSON: '" + line + "'");
    }
    if (!reply.is_object() || !reply.contains("action") || !reply.at("action").is_number_integer()) {
        throw ProtocolError("reply must be {\"action\": <integer>}, got '" + line + "'");
    }
    const auto action = reply.at("action").get<long long>();
    if (action < 0 || static_cast<unsigned long long>(action) >= num_actions) {
        throw InvalidAction("action " + std::to_string(action) + " outside [0, " + std::to_string(num_actions) + ")",
                            action);
    }
    return static_cast<int>(action);
}

int external_policy_query(LineTransport& transport, const DecisionContext& ctx, std::chrono::milliseconds timeout)
{
    return parse_reply(transport.exchange(make_request(ctx).dump(), timeout), ctx.task.num_actions());
}

ExternalPolicy::ExternalPolicy(Endpoint endpoint, ExternalOptions options)
    : endpoint_(std::move(endpoint)), options_(options)
{
}

int ExternalPolicy::act(const DecisionContext& ctx)
{
    for (int attempt = 0;; ++attempt) {
        try {
            if (!transport_) {
                transport_ = open_transport(endpoint_);
            }
            return external_policy_query(*transport_, ctx, options_.timeout);
        } catch (const ProtocolError&) {
            throw;
        } catch (const InvalidAction&) {
            throw;
        } catch (const Error&) {
            // timeouts and broken connections leave the stream unsynchronized
            transport_.reset();
            if (attempt >= options_.retries) {
                throw;
            }
        }
    }
}

} // namespace icdm::rollout
