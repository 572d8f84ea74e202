#include "icdm/rollout/line_server.hpp"

#include "icdm/core/belief.hpp"
#include "icdm/core/error.hpp"
#include "icdm/rollout/rollout.hpp"

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cstring>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace icdm::rollout {

LineServer::LineServer(Handler handler, int port) : handler_(std::move(handler))
{
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        throw Error("cannot create server socket");
    }
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
        ::close(listen_fd_);
        throw Error(std::string("cannot listen: ") + std::strerror(errno));
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
}

LineServer::~LineServer() { stop(); }

void LineServer::stop()
{
    if (stopping_.exchange(true)) {
        return;
    }
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (acceptor_.joinable()) {
        acceptor_.join();
    }
    {
        std::lock_guard lock(mutex_);
        for (int fd : clients_) {
            ::shutdown(fd, SHUT_RDWR);
        }
    }
    for (auto& w : workers_) {
        if (w.joinable()) {
            w.join();
        }
    }
}

void LineServer::accept_loop()
{
    while (!stopping_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) {
                continue;
            }
            return;
        }
        std::lock_guard lock(mutex_);
        clients_.push_back(fd);
        workers_.emplace_back([this, fd] { serve(fd); });
    }
}

void LineServer::serve(int fd)
{
    std::string buffer;
    char chunk[4096];
    for (;;) {
        const auto n = ::read(fd, chunk, sizeof chunk);
        if (n <= 0) {
            break;
        }
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t nl = 0;
        while ((nl = buffer.find('\n')) != std::string::npos) {
            const std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            std::string reply;
            try {
                reply = handler_(line);
            } catch (const std::exception& e) {
                reply = nlohmann::json{{"error", e.what()}}.dump();
            }
            reply.push_back('\n');
            if (::send(fd, reply.data(), reply.size(), MSG_NOSIGNAL) < 0) {
                break;
            }
        }
    }
    std::lock_guard lock(mutex_);
    std::erase(clients_, fd);
    ::close(fd);
}

LineServer::Handler make_oracle_responder(std::shared_ptr<const Task> task,
                                          std::shared_ptr<const solvers::TaskSolution> solution)
{
    return [task, solution](const std::string& line) {
        const auto request = nlohmann::json::parse(line);
        const int t = request.at("step").get<int>() - 1;
        const auto current = request.at("current_obs").get<std::size_t>();
        if (solution->is_mdp()) {
            const int a = solution->mdp().policy.at(static_cast<std::size_t>(t)).at(current);
            return nlohmann::json{{"action", a}}.dump();
        }
        Trajectory history;
        for (const auto& step : request.at("history")) {
            history.steps.push_back({step.at("obs").get<int>(), step.at("action").get<int>(), step.value("reward", 0.0)});
        }
        const Belief belief = belief_from_history(*task, history, static_cast<int>(current));
        return nlohmann::json{{"action", solution->belief().action(t, belief)}}.dump();
    };
}

} // namespace icdm::rollout
