// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/remote_client.hpp"

#include <httplib.h>

#include "fedsql/error.hpp"
#include "fedsql/rls.hpp"

namespace fedsql {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing '/'
};

SplitUrl split_url(const std::string& url) {
    if (!is_server_url(url)) throw Error(ErrorCode::MalformedUrl, "malformed URL '" + url + "'");
    const auto scheme_end = url.find("://") + 3;
    const auto slash = url.find('/', scheme_end);
    if (slash == std::string::npos) return {url, ""};
    std::string path = url.substr(slash);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {url.substr(0, slash), path};
}

class Call {
public:
    Call(const std::string& base_url, std::chrono::milliseconds request_timeout,
         std::chrono::milliseconds connect_timeout)
        : url_(split_url(base_url)), base_url_(base_url), client_(url_.origin) {
        client_.set_connection_timeout(connect_timeout);
        client_.set_read_timeout(request_timeout);
        client_.set_write_timeout(request_timeout);
    }

    explicit Call(const Endpoint& e) : Call(e.base_url, e.request_timeout, e.connect_timeout) {}

    std::string post(const std::string& path, const std::string& body) {
        return finish(client_.Post(url_.path + path, body, "application/json"));
    }

    std::string get(const std::string& path) { return finish(client_.Get(url_.path + path)); }

private:
    std::string finish(httplib::Result res) {
        if (!res) {
            throw Error(ErrorCode::RemoteTimeout, base_url_ + ": " + httplib::to_string(res.error()))
                .with_target(base_url_);
        }
        if (res->status == 200) return res->body;
        if (wire::is_error_body(res->body)) {
            const Error peer = wire::decode_error(res->body);
            // A peer relaying someone else's failure already names the root code.
            std::string code = peer.code() == ErrorCode::RemoteError && !peer.remote_code().empty()
                                   ? peer.remote_code()
                                   : std::string(error_code_name(peer.code()));
            Error err(ErrorCode::RemoteError, base_url_ + ": " + peer.what());
            err.with_remote_code(std::move(code)).with_target(peer.target().empty() ? base_url_ : peer.target());
            if (peer.offset()) err.with_offset(*peer.offset());
            throw err;
        }
        throw Error(ErrorCode::RemoteError, base_url_ + ": HTTP " + std::to_string(res->status))
            .with_target(base_url_);
    }

    SplitUrl url_;
    std::string base_url_;
    httplib::Client client_;
};

}  // namespace

ResultTable remote_query(const Endpoint& endpoint, const std::string& sql, bool no_forward) {
    const std::string body = Call(endpoint).post("/query", wire::encode_query_request({sql, no_forward}));
    return wire::decode_result(body);
}

std::string remote_register(const Endpoint& endpoint, const wire::RegisterRequest& request) {
    return wire::decode_register_response(Call(endpoint).post("/register", wire::encode_register_request(request)));
}

std::vector<std::string> remote_refresh(const Endpoint& endpoint) {
    return wire::decode_refresh_response(Call(endpoint).post("/refresh", "{}"));
}

wire::SchemaSnapshot remote_schema(const Endpoint& endpoint) {
    return wire::decode_schema(Call(endpoint).get("/schema"));
}

bool remote_health(const Endpoint& endpoint) {
    try {
        Call(endpoint).get("/health");
        return true;
    } catch (const Error&) {
        return false;
    }
}

std::size_t rls_publish(const Endpoint& rls, const std::string& server, const std::vector<std::string>& tables) {
    return wire::decode_ack(Call(rls).post("/rls/publish", wire::encode_publish_request({server, tables})));
}

std::size_t rls_unpublish(const Endpoint& rls, const std::string& server, const std::vector<std::string>& tables) {
    return wire::decode_ack(Call(rls).post("/rls/unpublish", wire::encode_publish_request({server, tables})));
}

std::vector<std::string> rls_lookup(const Endpoint& rls, const std::string& table) {
    return wire::decode_lookup_response(Call(rls).get("/rls/lookup?table=" + httplib::detail::encode_query_param(table)));
}

std::string http_get(const std::string& url, std::chrono::milliseconds timeout) {
    const SplitUrl split = split_url(url);
    const auto slash = url.find('/', url.find("://") + 3);
    const std::string origin = split.origin;
    const std::string path = slash == std::string::npos ? "/" : url.substr(slash);
    return Call(origin, timeout, std::min(timeout, std::chrono::milliseconds(5000))).get(path);
}

ResultTable HttpPeerClient::query(const std::string& base_url, const std::string& sql) {
    return remote_query(Endpoint{base_url, request_timeout_, connect_timeout_}, sql, true);
}

}  // namespace fedsql
