// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "fedsql/backend.hpp"
#include "fedsql/catalog.hpp"
#include "fedsql/executor.hpp"
#include "fedsql/federation.hpp"
#include "fedsql/result_table.hpp"
#include "fedsql/wire.hpp"

namespace fedsql {

struct Credentials {
    std::string username;
    std::string password;
};

struct ServerConfig {
    std::string listen_host = "127.0.0.1";
    int listen_port = 0;  ///< 0 picks a free port
    /// Base URL of the replica location service; empty runs without one, so
    /// only local tables resolve.
    std::string rls_url;
    double refresh_interval_seconds = 30;
    /// Run refresh_schemas on a timer while serving.
    bool auto_refresh = true;
    std::size_t row_cap = 1'000'000;
    /// URL peers and the RLS know this server by; defaults to the bound address.
    std::string public_url;
    /// source_id -> credentials used when opening sources named in an upper spec.
    std::map<std::string, Credentials> credentials;
    std::chrono::milliseconds peer_timeout{30'000};
    std::chrono::milliseconds drain_timeout{5'000};
};

/// Immutable once published; a mutation builds a new one and swaps it in.
struct ServerState {
    UpperSpec upper;
    LowerSpecMap lowers;
    DataDictionary dictionary;
    SourceConnections connections;
    /// Fingerprint of the serialized introspected spec, per source.
    std::map<std::string, Fingerprint> fingerprints;
};

struct RequestLogEntry {
    std::string sql;
    bool no_forward = false;
    std::string outcome;  ///< "ok" or the error code name
};

class FederationServer {
public:
    FederationServer(ServerConfig config, std::shared_ptr<DriverRegistry> drivers);
    ~FederationServer();

    FederationServer(const FederationServer&) = delete;
    FederationServer& operator=(const FederationServer&) = delete;

    /// Opens every source of an upper spec. Call before start().
    void load_upper_spec(std::string_view document, const SpecResolver& resolver);

    /// Binds, publishes local tables to the RLS and starts the refresh timer.
    /// Returns the bound port; throws AddressInUse.
    int start();

    /// Rejects new queries with Shutdown, waits up to drain_timeout for
    /// in-flight ones, then stops listening. Idempotent.
    void shutdown();

    ResultTable query(const std::string& sql, bool no_forward, QueryTrace* trace = nullptr);
    std::string register_database(const wire::RegisterRequest& request);
    std::vector<std::string> refresh_schemas();
    wire::SchemaSnapshot schema() const;

    std::shared_ptr<const ServerState> state() const;
    std::string public_url() const;
    std::vector<RequestLogEntry> request_log() const;
    void clear_request_log();
    FingerprintProbe fingerprint_probe() const;
    /// Per-source failures seen by the most recent refresh.
    std::map<std::string, std::string> last_refresh_errors() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Reads a spec reference: http(s) URL, `file:` prefix or plain path.
std::string fetch_spec_document(const std::string& ref);

}  // namespace fedsql
