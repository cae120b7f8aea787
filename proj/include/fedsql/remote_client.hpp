// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "fedsql/executor.hpp"
#include "fedsql/result_table.hpp"
#include "fedsql/wire.hpp"

namespace fedsql {

/// A federation server or RLS reachable over HTTP. Any transport failure,
/// including either timeout expiring, surfaces as RemoteTimeout.
struct Endpoint {
    std::string base_url;
    std::chrono::milliseconds request_timeout{30'000};
    std::chrono::milliseconds connect_timeout{5'000};
};

/// Error bodies become RemoteError carrying the peer's code as remote_code.
ResultTable remote_query(const Endpoint& endpoint, const std::string& sql, bool no_forward = false);

std::string remote_register(const Endpoint& endpoint, const wire::RegisterRequest& request);
std::vector<std::string> remote_refresh(const Endpoint& endpoint);
wire::SchemaSnapshot remote_schema(const Endpoint& endpoint);
bool remote_health(const Endpoint& endpoint);

std::size_t rls_publish(const Endpoint& rls, const std::string& server, const std::vector<std::string>& tables);
std::size_t rls_unpublish(const Endpoint& rls, const std::string& server, const std::vector<std::string>& tables);
std::vector<std::string> rls_lookup(const Endpoint& rls, const std::string& table);

/// GET of an arbitrary http(s) URL; body on 200, RemoteError otherwise.
std::string http_get(const std::string& url, std::chrono::milliseconds timeout = std::chrono::seconds(30));

/// PeerClient over HTTP; fragments are always sent with no_forward set.
class HttpPeerClient : public PeerClient {
public:
    explicit HttpPeerClient(std::chrono::milliseconds request_timeout = std::chrono::seconds(30),
                            std::chrono::milliseconds connect_timeout = std::chrono::seconds(5))
        : request_timeout_(request_timeout), connect_timeout_(connect_timeout) {}

    ResultTable query(const std::string& base_url, const std::string& sql) override;

private:
    std::chrono::milliseconds request_timeout_;
    std::chrono::milliseconds connect_timeout_;
};

}  // namespace fedsql
