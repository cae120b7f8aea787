// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <httplib.h>
#include <sys/socket.h>

#include <string>
#include <thread>

#include "fedsql/error.hpp"
#include "fedsql/wire.hpp"

namespace fedsql::detail {

/// httplib server bound without SO_REUSEPORT, so a second bind on a busy
/// port fails instead of silently sharing it.
class HttpService {
public:
    explicit HttpService(std::size_t threads = 32) {
        server_.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
        });
        server_.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    }

    ~HttpService() { stop(); }

    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    httplib::Server& server() { return server_; }

    /// Binds (port 0 picks a free one) and serves on a background thread.
    int start(const std::string& host, int port) {
        int bound = port;
        if (port == 0) {
            bound = server_.bind_to_any_port(host);
            if (bound < 0) throw Error(ErrorCode::AddressInUse, "cannot bind " + host);
        } else if (!server_.bind_to_port(host, port)) {
            throw Error(ErrorCode::AddressInUse, "cannot bind " + host + ":" + std::to_string(port));
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        host_ = host;
        port_ = bound;
        return bound;
    }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    int port() const { return port_; }
    std::string base_url() const { return "http://" + host_ + ":" + std::to_string(port_); }

private:
    httplib::Server server_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
};

inline void reply_error(httplib::Response& res, const Error& e) {
    res.status = http_status_for(e.code());
    res.set_content(wire::encode_error(e), "application/json");
}

inline void reply_json(httplib::Response& res, const std::string& body) {
    res.status = 200;
    res.set_content(body, "application/json");
}

}  // namespace fedsql::detail
