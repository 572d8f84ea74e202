#pragma once

#include "icdm/core/task.hpp"
#include "icdm/solvers/oracle.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace icdm::rollout {

/// Minimal newline-delimited TCP server on 127.0.0.1. Each connection is
/// served by its own thread; `handler` maps one request line to one reply.
class LineServer {
public:
    using Handler = std::function<std::string(const std::string&)>;

    explicit LineServer(Handler handler, int port = 0);
    ~LineServer();
    LineServer(const LineServer&) = delete;
    LineServer& operator=(const LineServer&) = delete;

    int port() const noexcept { return port_; }
    std::string endpoint() const { return "tcp://127.0.0.1:" + std::to_string(port_); }
    void stop();

private:
    void accept_loop();
    void serve(int fd);

    Handler handler_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread acceptor_;
    std::mutex mutex_;
    std::vector<int> clients_;
    std::vector<std::thread> workers_;
};

/// Request handler that answers with the oracle action. It rebuilds the
/// belief from the transmitted history, so it needs no session state.
LineServer::Handler make_oracle_responder(std::shared_ptr<const Task> task,
                                          std::shared_ptr<const solvers::TaskSolution> solution);

} // namespace icdm::rollout
