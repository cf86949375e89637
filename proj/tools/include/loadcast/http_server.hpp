#pragma once

#include <memory>
#include <string>

#include "loadcast/service.hpp"

namespace httplib {
class Server;
}

namespace loadcast {

inline constexpr const char* kJsonContentType = "application/json";

/// Routes:
///   GET  /health
///   GET  /countries
///   GET  /forecast/{country}?from=&hours=
///   POST /forecast/{country}?now=
///   POST /data/{country}?source=total_load|vertical_load
///   POST /models/{country}/rebuild?now=&deciles=
///   GET  /quality?from=&to=
///   GET  /evaluate/{country}?from=&to=&horizon=
class HttpServer {
public:
    explicit HttpServer(Api& api);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Returns the bound port; `port` 0 picks a free one. Throws Error on failure.
    int bind(const std::string& host, int port);

    /// Blocks until stop() is called.
    void listen();
    void stop();
    bool running() const;

private:
    void install_routes();

    Api& api_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace loadcast
