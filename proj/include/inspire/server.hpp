#pragma once

#include "inspire/workspace.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace inspire::service {

int http_status(ErrorCode code);

struct ServerOptions {
    std::optional<std::string> token;          // INSPIRE_TOKEN: required as "Bearer <token>" on /v1
    std::function<void(const std::string&)> log;  // one JSON object per call; empty: stderr
};

// JSON-over-HTTP front end of a workspace. Every non-2xx body is
// {"code", "message", "correlation_id"}.
class ApiServer {
public:
    ApiServer(Workspace& workspace, ServerOptions options = {});
    ~ApiServer();

    // Returns the bound port; throws Error(validation) when binding fails.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace inspire::service
