// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace fedsql {

/// `http://host[:port][/path]` or https; anything else is MalformedUrl.
bool is_server_url(std::string_view url);

/// Maps logical table names to the federation servers that hold them.
/// Safe for concurrent use; lookups see either all or none of a publish.
class ReplicaRegistry {
public:
    struct Publication {
        std::string server;
        std::chrono::system_clock::time_point published_at;
    };

    /// Returns the number of distinct tables acknowledged. Re-publishing an
    /// existing mapping only refreshes its timestamp.
    std::size_t publish(const std::string& server, const std::vector<std::string>& tables);

    /// Returns how many mappings were removed; absent ones are ignored.
    std::size_t unpublish(const std::string& server, const std::vector<std::string>& tables);

    /// Servers holding `table`, ascending; empty when unknown.
    std::vector<std::string> lookup(const std::string& table) const;

    std::map<std::string, std::vector<Publication>> snapshot() const;

private:
    mutable std::shared_mutex mu_;
    // table -> server -> published_at
    std::map<std::string, std::map<std::string, std::chrono::system_clock::time_point>> entries_;
};

/// HTTP front end for a ReplicaRegistry:
/// POST /rls/publish, POST /rls/unpublish, GET /rls/lookup?table=NAME.
class RlsServer {
public:
    explicit RlsServer(std::shared_ptr<ReplicaRegistry> registry = std::make_shared<ReplicaRegistry>());
    ~RlsServer();

    RlsServer(const RlsServer&) = delete;
    RlsServer& operator=(const RlsServer&) = delete;

    /// Port 0 binds a free port. Returns the bound port; throws AddressInUse.
    int start(const std::string& host, int port);
    void stop();

    std::string base_url() const;
    ReplicaRegistry& registry() { return *registry_; }

private:
    struct Impl;
    std::shared_ptr<ReplicaRegistry> registry_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fedsql
