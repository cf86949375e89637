#include "loadcast/http_server.hpp"

#include <charconv>
#include <chrono>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace loadcast {
namespace {

void reply(httplib::Response& res, const ApiResponse& out) {
    res.status = out.status;
    res.set_content(out.body.dump(), kJsonContentType);
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) {
        return std::nullopt;
    }
    return req.get_param_value(name);
}

std::string required(const httplib::Request& req, const char* name) {
    auto value = param(req, name);
    if (!value || value->empty()) {
        throw InvalidInput(std::string("missing query parameter '") + name + "'");
    }
    return *value;
}

int integer(const std::string& text, const char* name) {
    int value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw InvalidInput(std::string("query parameter '") + name + "' must be an integer");
    }
    return value;
}

bool boolean(const std::string& text, const char* name) {
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    throw InvalidInput(std::string("query parameter '") + name + "' must be true or false");
}

Timestamp timestamp(const std::string& text) {
    return parse_timestamp(text);
}

Timestamp now_or(const httplib::Request& req) {
    if (auto now = param(req, "now")) {
        return timestamp(*now);
    }
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

Period period_of(const httplib::Request& req) {
    return Period{timestamp(required(req, "from")), timestamp(required(req, "to"))};
}

} // namespace

HttpServer::HttpServer(Api& api) : api_(api), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

HttpServer::~HttpServer() {
    stop();
}

void HttpServer::install_routes() {
    auto& s = *server_;

    s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"status":"ok"})", kJsonContentType);
    });

    s.Get("/countries", [this](const httplib::Request&, httplib::Response& res) {
        reply(res, Api::respond([&] { return api_.countries(); }));
    });

    s.Get(R"(/forecast/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, Api::respond([&] {
                  std::optional<Timestamp> from;
                  if (auto f = param(req, "from")) {
                      from = timestamp(*f);
                  }
                  const int hours = param(req, "hours") ? integer(*param(req, "hours"), "hours") : kMaxHorizon;
                  return api_.forecast(req.matches[1], from, hours);
              }));
    });

    s.Post(R"(/forecast/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, Api::respond([&] { return api_.issue_forecast(req.matches[1], now_or(req)); }));
    });

    s.Post(R"(/data/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, Api::respond([&] {
                  const auto source = param(req, "source") ? source_from_string(*param(req, "source"))
                                                           : SourceKind::total_load;
                  return api_.ingest(req.matches[1], req.body, source);
              }));
    });

    s.Post(R"(/models/([^/]+)/rebuild)", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, Api::respond([&] {
                  std::optional<bool> deciles;
                  if (auto d = param(req, "deciles")) {
                      deciles = boolean(*d, "deciles");
                  }
                  return api_.rebuild(req.matches[1], now_or(req), deciles);
              }));
    });

    s.Get("/quality", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, Api::respond([&] { return api_.quality(period_of(req)); }));
    });

    s.Get(R"(/evaluate/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, Api::respond([&] {
                  std::optional<int> horizon;
                  if (auto h = param(req, "horizon")) {
                      horizon = integer(*h, "horizon");
                  }
                  return api_.evaluate(req.matches[1], period_of(req), horizon);
              }));
    });

    s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            const auto code = res.status == 404 ? ErrorCode::not_found
                              : res.status >= 500 ? ErrorCode::internal
                                                  : ErrorCode::invalid_input;
            res.set_content(error_document(code, "no route for this request").dump(), kJsonContentType);
        }
    });

    s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "unknown error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(error_document(ErrorCode::internal, what).dump(), kJsonContentType);
    });

    s.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
    });
}

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound < 0) {
            throw Error(ErrorCode::internal, "cannot bind " + host);
        }
        return bound;
    }
    if (!server_->bind_to_port(host, port)) {
        throw Error(ErrorCode::internal, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void HttpServer::listen() {
    server_->listen_after_bind();
}

void HttpServer::stop() {
    if (server_) {
        server_->stop();
    }
}

bool HttpServer::running() const {
    return server_->is_running();
}

} // namespace loadcast
