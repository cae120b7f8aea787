// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/rls.hpp"

#include <mutex>
#include <regex>
#include <set>

#include "fedsql/catalog.hpp"
#include "fedsql/error.hpp"
#include "fedsql/wire.hpp"
#include "http_service.hpp"

namespace fedsql {

bool is_server_url(std::string_view url) {
    static const std::regex kPattern(R"(^https?://[A-Za-z0-9._\-]+(:[0-9]{1,5})?(/[^\s]*)?$)");
    return std::regex_match(url.begin(), url.end(), kPattern);
}

namespace {

std::set<std::string> checked(const std::string& server, const std::vector<std::string>& tables) {
    if (!is_server_url(server)) throw Error(ErrorCode::MalformedUrl, "malformed server URL '" + server + "'");
    std::set<std::string> unique;
    for (const auto& t : tables) {
        if (!is_identifier(t)) throw Error(ErrorCode::MalformedRequest, "invalid table name '" + t + "'");
        unique.insert(t);
    }
    return unique;
}

}  // namespace

std::size_t ReplicaRegistry::publish(const std::string& server, const std::vector<std::string>& tables) {
    const auto unique = checked(server, tables);
    const auto now = std::chrono::system_clock::now();
    std::unique_lock lock(mu_);
    for (const auto& t : unique) entries_[t][server] = now;
    return unique.size();
}

std::size_t ReplicaRegistry::unpublish(const std::string& server, const std::vector<std::string>& tables) {
    const auto unique = checked(server, tables);
    std::unique_lock lock(mu_);
    std::size_t removed = 0;
    for (const auto& t : unique) {
        auto it = entries_.find(t);
        if (it == entries_.end()) continue;
        removed += it->second.erase(server);
        if (it->second.empty()) entries_.erase(it);
    }
    return removed;
}

std::vector<std::string> ReplicaRegistry::lookup(const std::string& table) const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    if (auto it = entries_.find(table); it != entries_.end()) {
        for (const auto& [server, when] : it->second) out.push_back(server);
    }
    return out;
}

std::map<std::string, std::vector<ReplicaRegistry::Publication>> ReplicaRegistry::snapshot() const {
    std::shared_lock lock(mu_);
    std::map<std::string, std::vector<Publication>> out;
    for (const auto& [table, servers] : entries_) {
        for (const auto& [server, when] : servers) out[table].push_back({server, when});
    }
    return out;
}

struct RlsServer::Impl {
    detail::HttpService http;
};

RlsServer::RlsServer(std::shared_ptr<ReplicaRegistry> registry)
    : registry_(std::move(registry)), impl_(std::make_unique<Impl>()) {
    auto& srv = impl_->http.server();
    auto reg = registry_;
    srv.Post("/rls/publish", [reg](const httplib::Request& req, httplib::Response& res) {
        try {
            const auto body = wire::decode_publish_request(req.body);
            detail::reply_json(res, wire::encode_ack(reg->publish(body.server, body.tables)));
        } catch (const Error& e) {
            detail::reply_error(res, e);
        }
    });
    srv.Post("/rls/unpublish", [reg](const httplib::Request& req, httplib::Response& res) {
        try {
            const auto body = wire::decode_publish_request(req.body);
            detail::reply_json(res, wire::encode_ack(reg->unpublish(body.server, body.tables)));
        } catch (const Error& e) {
            detail::reply_error(res, e);
        }
    });
    srv.Get("/rls/lookup", [reg](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("table")) {
            detail::reply_error(res, Error(ErrorCode::MalformedRequest, "missing 'table' parameter"));
            return;
        }
        detail::reply_json(res, wire::encode_lookup_response(reg->lookup(req.get_param_value("table"))));
    });
    srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        detail::reply_json(res, wire::encode_health());
    });
}

RlsServer::~RlsServer() { stop(); }

int RlsServer::start(const std::string& host, int port) { return impl_->http.start(host, port); }

void RlsServer::stop() { impl_->http.stop(); }

std::string RlsServer::base_url() const { return impl_->http.base_url(); }

}  // namespace fedsql
