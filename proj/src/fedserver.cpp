// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/fedserver.hpp"

#include <algorithm>
#include <condition_variable>
#include <fstream>
#include <set>
#include <sstream>
#include <stop_token>
#include <thread>

#include "fedsql/error.hpp"
#include "fedsql/remote_client.hpp"
#include "fedsql/rls.hpp"
#include "http_service.hpp"

namespace fedsql {

std::string fetch_spec_document(const std::string& ref) {
    if (ref.rfind("http://", 0) == 0 || ref.rfind("https://", 0) == 0) return http_get(ref);
    const std::string path = ref.rfind("file:", 0) == 0 ? ref.substr(5) : ref;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnresolvableRef, "cannot read spec '" + ref + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

/// Adapters only promise safety across distinct handles, while the server
/// keeps one handle per source for all concurrent queries. This wrapper hands
/// out logical handles; each call borrows an idle physical handle, opening
/// another one when all are busy.
class HandlePool : public BackendAdapter {
public:
    explicit HandlePool(std::shared_ptr<BackendAdapter> inner) : inner_(std::move(inner)) {}

    std::string driver_name() const override { return inner_->driver_name(); }

    Handle open(const std::string& connection, const std::string& username, const std::string& password) override {
        auto pool = std::make_shared<Pool>(Pool{connection, username, password, {}, false});
        pool->idle.push_back(inner_->open(connection, username, password));
        std::lock_guard lock(mu_);
        const Handle id = next_++;
        pools_[id] = std::move(pool);
        return id;
    }

    ResultTable execute(Handle handle, std::span<const std::string> select_fields,
                        std::span<const std::string> tables, const std::string& where_clause) override {
        Lease lease(*this, handle);
        return inner_->execute(lease.handle, select_fields, tables, where_clause);
    }

    std::vector<TableSchema> describe(Handle handle) override {
        Lease lease(*this, handle);
        return inner_->describe(lease.handle);
    }

    void create_table(Handle handle, const TableSchema& schema) override {
        Lease lease(*this, handle);
        inner_->create_table(lease.handle, schema);
    }

    void append_rows(Handle handle, const std::string& table, const std::vector<Row>& rows) override {
        Lease lease(*this, handle);
        inner_->append_rows(lease.handle, table, rows);
    }

    /// Idle handles close now, borrowed ones when they come back.
    void close(Handle handle) override {
        std::vector<Handle> idle;
        {
            std::lock_guard lock(mu_);
            auto it = pools_.find(handle);
            if (it == pools_.end()) return;
            it->second->closed = true;
            idle.swap(it->second->idle);
            pools_.erase(it);
        }
        for (Handle h : idle) inner_->close(h);
    }

private:
    struct Pool {
        std::string connection, username, password;
        std::vector<Handle> idle;
        bool closed = false;
    };

    struct Lease {
        HandlePool& owner;
        std::shared_ptr<Pool> pool;
        Handle handle = 0;

        Lease(HandlePool& o, Handle logical) : owner(o) {
            {
                std::lock_guard lock(owner.mu_);
                auto it = owner.pools_.find(logical);
                if (it == owner.pools_.end()) throw Error(ErrorCode::Internal, "unknown backend handle");
                pool = it->second;
                if (!pool->idle.empty()) {
                    handle = pool->idle.back();
                    pool->idle.pop_back();
                    return;
                }
            }
            handle = owner.inner_->open(pool->connection, pool->username, pool->password);
        }

        ~Lease() {
            {
                std::lock_guard lock(owner.mu_);
                if (!pool->closed) {
                    pool->idle.push_back(handle);
                    return;
                }
            }
            try {
                owner.inner_->close(handle);
            } catch (...) {
            }
        }

        Lease(const Lease&) = delete;
        Lease& operator=(const Lease&) = delete;
    };

    std::shared_ptr<BackendAdapter> inner_;
    std::mutex mu_;
    std::map<Handle, std::shared_ptr<Pool>> pools_;
    Handle next_ = 1;
};

std::set<std::string> table_names(const LowerSpec& spec) {
    std::set<std::string> out;
    for (const auto& t : spec.tables) out.insert(t.logical_name);
    return out;
}

/// Every physical table and column a lower spec names must exist in the backend.
void check_against_backend(const LowerSpec& spec, const std::vector<TableSchema>& actual) {
    for (const auto& t : spec.tables) {
        auto it = std::find_if(actual.begin(), actual.end(), [&](const TableSchema& s) { return s.name == t.physical_name; });
        if (it == actual.end()) {
            throw Error(ErrorCode::MalformedSpec, "table '" + t.physical_name + "' does not exist in database '" +
                                                      spec.database_logical_name + "'");
        }
        for (const auto& c : t.columns) {
            auto col = std::find_if(it->columns.begin(), it->columns.end(),
                                    [&](const Column& x) { return x.name == c.physical_name; });
            if (col == it->columns.end()) {
                throw Error(ErrorCode::MalformedSpec,
                            "column '" + t.physical_name + "." + c.physical_name + "' does not exist in the database");
            }
        }
    }
}

}  // namespace

struct FederationServer::Impl {
    ServerConfig config;
    std::shared_ptr<DriverRegistry> drivers;

    mutable std::mutex state_mu;
    std::shared_ptr<const ServerState> state = std::make_shared<ServerState>();

    std::mutex mutation_mu;  // one register/refresh at a time
    std::vector<SourceConnection> opened;  // closed on destruction; guarded by mutation_mu

    mutable std::mutex log_mu;
    std::vector<RequestLogEntry> log;
    FingerprintProbe probe;
    std::map<std::string, std::string> refresh_errors;

    std::mutex drain_mu;
    std::condition_variable drain_cv;
    std::size_t in_flight = 0;
    bool stopping = false;
    bool started = false;

    std::unique_ptr<detail::HttpService> http;
    std::jthread timer;
    std::string url;
    HttpPeerClient peers;

    Impl(ServerConfig c, std::shared_ptr<DriverRegistry> d)
        : config(std::move(c)), drivers(std::move(d)), peers(config.peer_timeout) {}

    std::shared_ptr<const ServerState> current() const {
        std::lock_guard lock(state_mu);
        return state;
    }

    void publish_state(std::shared_ptr<const ServerState> next) {
        std::lock_guard lock(state_mu);
        state = std::move(next);
    }

    std::optional<Endpoint> rls() const {
        if (config.rls_url.empty()) return std::nullopt;
        return Endpoint{config.rls_url, config.peer_timeout, std::chrono::milliseconds(5'000)};
    }

    void log_request(const std::string& sql, bool no_forward, std::string outcome) {
        std::lock_guard lock(log_mu);
        log.push_back({sql, no_forward, std::move(outcome)});
    }

    std::mutex pools_mu;
    std::map<std::string, std::shared_ptr<HandlePool>> pools;  // by driver name

    BackendAdapter& driver(const std::string& name) {
        auto adapter = drivers ? drivers->find(name) : nullptr;
        if (!adapter) throw Error(ErrorCode::InvalidArgument, "no driver named '" + name + "'");
        std::lock_guard lock(pools_mu);
        auto& pool = pools[name];
        if (!pool) pool = std::make_shared<HandlePool>(std::move(adapter));
        return *pool;
    }

    Handle open_source(BackendAdapter& adapter, const std::string& url, const Credentials& creds) {
        try {
            return adapter.open(url, creds.username, creds.password);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::BackendUnavailable) throw;
            throw Error(ErrorCode::BackendUnavailable, e.what()).with_target(url);
        } catch (const std::exception& e) {
            throw Error(ErrorCode::BackendUnavailable, e.what()).with_target(url);
        }
    }

    /// Introspected spec and its fingerprint; this is what refresh compares.
    static std::pair<LowerSpec, Fingerprint> observe(BackendAdapter& adapter, Handle h, const std::string& id) {
        LowerSpec spec = introspect(adapter, h, id);
        Fingerprint fp = fingerprint(serialize_lower_spec(spec));
        return {std::move(spec), std::move(fp)};
    }

    void close_quietly(BackendAdapter& adapter, Handle h) {
        try {
            adapter.close(h);
        } catch (...) {
        }
    }

    struct QueryGuard {
        Impl& impl;
        explicit QueryGuard(Impl& i) : impl(i) {
            std::lock_guard lock(impl.drain_mu);
            if (impl.stopping) throw Error(ErrorCode::Shutdown, "server is shutting down");
            ++impl.in_flight;
        }
        ~QueryGuard() {
            std::lock_guard lock(impl.drain_mu);
            --impl.in_flight;
            impl.drain_cv.notify_all();
        }
    };
};

FederationServer::FederationServer(ServerConfig config, std::shared_ptr<DriverRegistry> drivers) {
    if (!(config.refresh_interval_seconds > 0)) {
        throw Error(ErrorCode::InvalidArgument, "refresh interval must be positive");
    }
    if (!config.rls_url.empty() && !is_server_url(config.rls_url)) {
        throw Error(ErrorCode::MalformedUrl, "malformed RLS URL '" + config.rls_url + "'");
    }
    impl_ = std::make_unique<Impl>(std::move(config), std::move(drivers));
}

FederationServer::~FederationServer() {
    shutdown();
    std::lock_guard lock(impl_->mutation_mu);
    for (auto& conn : impl_->opened) impl_->close_quietly(*conn.adapter, conn.handle);
}

void FederationServer::load_upper_spec(std::string_view document, const SpecResolver& resolver) {
    Impl& im = *impl_;
    std::lock_guard lock(im.mutation_mu);
    auto [upper, lowers] = parse_upper_spec(document, resolver);
    auto next = std::make_shared<ServerState>();
    std::vector<SourceConnection> opened;
    try {
        for (const auto& entry : upper.entries) {
            BackendAdapter& adapter = im.driver(entry.driver_name);
            Credentials creds;
            if (auto it = im.config.credentials.find(entry.source_id); it != im.config.credentials.end()) creds = it->second;
            const Handle h = im.open_source(adapter, entry.url, creds);
            opened.push_back({&adapter, h});
            next->connections[entry.source_id] = {&adapter, h};
            const std::vector<TableSchema> actual = adapter.describe(h);
            check_against_backend(lowers.at(entry.source_id), actual);
            next->fingerprints[entry.source_id] = Impl::observe(adapter, h, entry.source_id).second;
        }
        next->dictionary = build_dictionary(upper, lowers);
    } catch (...) {
        for (auto& c : opened) im.close_quietly(*c.adapter, c.handle);
        throw;
    }
    // Sources already registered stay; the loaded spec must not clash with them.
    auto cur = im.current();
    for (const auto& e : cur->upper.entries) {
        if (upper.find(e.source_id)) {
            for (auto& c : opened) im.close_quietly(*c.adapter, c.handle);
            throw Error(ErrorCode::DuplicateSourceId, "source '" + e.source_id + "' is already registered");
        }
    }
    next->upper = cur->upper;
    next->upper.entries.insert(next->upper.entries.end(), upper.entries.begin(), upper.entries.end());
    next->lowers = cur->lowers;
    next->lowers.insert(lowers.begin(), lowers.end());
    for (const auto& [id, c] : cur->connections) next->connections[id] = c;
    for (const auto& [id, f] : cur->fingerprints) next->fingerprints[id] = f;
    try {
        next->dictionary = build_dictionary(next->upper, next->lowers);
    } catch (...) {
        for (auto& c : opened) im.close_quietly(*c.adapter, c.handle);
        throw;
    }
    im.opened.insert(im.opened.end(), opened.begin(), opened.end());
    im.publish_state(std::move(next));
}

int FederationServer::start() {
    Impl& im = *impl_;
    if (im.started) throw Error(ErrorCode::InvalidArgument, "server already started");
    im.http = std::make_unique<detail::HttpService>();
    auto& srv = im.http->server();

    srv.Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
        try {
            const auto q = wire::decode_query_request(req.body);
            detail::reply_json(res, wire::encode_result(query(q.sql, q.no_forward)));
        } catch (const Error& e) {
            detail::reply_error(res, e);
        } catch (const std::exception& e) {
            detail::reply_error(res, Error(ErrorCode::Internal, e.what()));
        }
    });
    srv.Post("/register", [this](const httplib::Request& req, httplib::Response& res) {
        try {
            detail::reply_json(res, wire::encode_register_response(register_database(wire::decode_register_request(req.body))));
        } catch (const Error& e) {
            detail::reply_error(res, e);
        } catch (const std::exception& e) {
            detail::reply_error(res, Error(ErrorCode::Internal, e.what()));
        }
    });
    srv.Post("/refresh", [this](const httplib::Request&, httplib::Response& res) {
        try {
            detail::reply_json(res, wire::encode_refresh_response(refresh_schemas()));
        } catch (const Error& e) {
            detail::reply_error(res, e);
        }
    });
    srv.Get("/schema", [this](const httplib::Request&, httplib::Response& res) {
        detail::reply_json(res, wire::encode_schema(schema()));
    });
    srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        detail::reply_json(res, wire::encode_health());
    });

    const int port = im.http->start(im.config.listen_host, im.config.listen_port);
    im.url = im.config.public_url.empty() ? im.http->base_url() : im.config.public_url;

    if (auto rls = im.rls()) {
        const auto st = im.current();
        std::vector<std::string> tables;
        for (const auto& [name, binding] : st->dictionary.tables) tables.push_back(name);
        if (!tables.empty()) {
            try {
                rls_publish(*rls, im.url, tables);
            } catch (...) {
                im.http->stop();
                throw;
            }
        }
    }
    im.started = true;

    if (im.config.auto_refresh) {
        const auto interval = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::duration<double>(im.config.refresh_interval_seconds));
        im.timer = std::jthread([this, interval](std::stop_token stop) {
            std::mutex m;
            std::condition_variable_any cv;
            std::unique_lock lock(m);
            while (!cv.wait_for(lock, stop, interval, [] { return false; })) {
                if (stop.stop_requested()) break;
                try {
                    refresh_schemas();
                } catch (...) {
                    // failures are recorded per source; keep ticking
                }
            }
        });
    }
    return port;
}

void FederationServer::shutdown() {
    Impl& im = *impl_;
    {
        std::unique_lock lock(im.drain_mu);
        if (im.stopping) return;
        im.stopping = true;
        im.drain_cv.wait_for(lock, im.config.drain_timeout, [&] { return im.in_flight == 0; });
    }
    if (im.timer.joinable()) {
        im.timer.request_stop();
        im.timer.join();
    }
    if (im.started) {
        if (auto rls = im.rls()) {
            std::vector<std::string> tables;
            for (const auto& [name, b] : im.current()->dictionary.tables) tables.push_back(name);
            try {
                if (!tables.empty()) rls_unpublish(*rls, im.url, tables);
            } catch (...) {
                // the RLS may already be gone
            }
        }
    }
    if (im.http) im.http->stop();
}

ResultTable FederationServer::query(const std::string& sql, bool no_forward, QueryTrace* trace) {
    Impl& im = *impl_;
    try {
        Impl::QueryGuard guard(im);
        const auto st = im.current();
        FederationContext ctx;
        ctx.dictionary = &st->dictionary;
        ctx.sources = &st->connections;
        ctx.peers = &im.peers;
        ctx.options.max_cells = im.config.row_cap;
        ctx.allow_forward = !no_forward;
        if (auto rls = im.rls()) {
            const std::string self = im.url;
            ctx.lookup = [rls, self](const std::string& table) {
                auto servers = rls_lookup(*rls, table);
                std::erase(servers, self);
                return servers;
            };
        }
        ResultTable out = federated_query(sql, ctx, trace);
        im.log_request(sql, no_forward, "ok");
        return out;
    } catch (const Error& e) {
        im.log_request(sql, no_forward, std::string(error_code_name(e.code())));
        throw;
    }
}

std::string FederationServer::register_database(const wire::RegisterRequest& request) {
    Impl& im = *impl_;
    std::lock_guard lock(im.mutation_mu);
    const std::string ref = request.spec_url ? *request.spec_url : std::string();
    LowerSpec spec = parse_lower_spec(request.spec_inline ? *request.spec_inline : fetch_spec_document(ref));
    spec.validate();
    const std::string id = spec.database_logical_name;
    const auto cur = im.current();
    if (cur->upper.find(id)) throw Error(ErrorCode::DuplicateSourceId, "source '" + id + "' is already registered");

    BackendAdapter& adapter = im.driver(request.driver);
    const Handle h = im.open_source(adapter, request.url, {request.username, request.password});
    try {
        std::vector<TableSchema> actual;
        try {
            actual = adapter.describe(h);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::BackendUnavailable) throw;
            throw Error(ErrorCode::BackendUnavailable, e.what()).with_target(request.url);
        }
        check_against_backend(spec, actual);

        auto next = std::make_shared<ServerState>(*cur);
        next->upper.entries.push_back({id, request.url, adapter.driver_name(), request.spec_url ? ref : "inline:" + id});
        next->lowers[id] = spec;
        next->connections[id] = {&adapter, h};
        next->fingerprints[id] = Impl::observe(adapter, h, id).second;
        next->dictionary = build_dictionary(next->upper, next->lowers);

        if (im.started) {
            if (auto rls = im.rls()) {
                const auto names = table_names(spec);
                rls_publish(*rls, im.url, {names.begin(), names.end()});
            }
        }
        im.opened.push_back({&adapter, h});
        im.publish_state(std::move(next));
    } catch (...) {
        im.close_quietly(adapter, h);
        throw;
    }
    return id;
}

std::vector<std::string> FederationServer::refresh_schemas() {
    Impl& im = *impl_;
    std::lock_guard lock(im.mutation_mu);
    const auto cur = im.current();
    auto next = std::make_shared<ServerState>(*cur);
    std::vector<std::string> changed;
    std::map<std::string, std::string> errors;
    std::vector<std::string> to_publish, to_unpublish;

    for (const auto& entry : cur->upper.entries) {
        const std::string& id = entry.source_id;
        const SourceConnection conn = cur->connections.at(id);
        try {
            auto [introspected, fp] = Impl::observe(*conn.adapter, conn.handle, id);
            FingerprintProbe probe;
            const bool differs = specs_changed(cur->fingerprints.at(id), fp, &probe);
            {
                std::lock_guard l(im.log_mu);
                im.probe.size_comparisons += probe.size_comparisons;
                im.probe.md5_comparisons += probe.md5_comparisons;
            }
            if (!differs) continue;

            const LowerSpec& old_spec = cur->lowers.at(id);
            LowerSpec updated = carry_logical_names(introspected, old_spec);
            auto trial = next->lowers;
            trial[id] = updated;
            build_dictionary(next->upper, trial);  // a rename may collide with another source

            const auto before = table_names(old_spec);
            const auto after = table_names(updated);
            for (const auto& t : after) {
                if (!before.count(t)) to_publish.push_back(t);
            }
            for (const auto& t : before) {
                if (!after.count(t)) to_unpublish.push_back(t);
            }
            next->lowers[id] = std::move(updated);
            next->fingerprints[id] = fp;
            for (auto& e : next->upper.entries) {
                if (e.source_id == id) e.lower_spec_ref = "inline:" + id;
            }
            changed.push_back(id);
        } catch (const std::exception& e) {
            errors[id] = e.what();
        }
    }
    {
        std::lock_guard l(im.log_mu);
        im.refresh_errors = errors;
    }
    std::sort(changed.begin(), changed.end());
    if (changed.empty()) return changed;

    next->dictionary = build_dictionary(next->upper, next->lowers);
    im.publish_state(std::move(next));
    if (im.started) {
        if (auto rls = im.rls()) {
            try {
                if (!to_publish.empty()) rls_publish(*rls, im.url, to_publish);
                if (!to_unpublish.empty()) rls_unpublish(*rls, im.url, to_unpublish);
            } catch (const std::exception& e) {
                std::lock_guard l(im.log_mu);
                im.refresh_errors["rls"] = e.what();
            }
        }
    }
    return changed;
}

wire::SchemaSnapshot FederationServer::schema() const {
    const auto st = impl_->current();
    wire::SchemaSnapshot out;
    out.upper = serialize_upper_spec(st->upper);
    for (const auto& [id, spec] : st->lowers) out.lowers[id] = serialize_lower_spec(spec);
    return out;
}

std::shared_ptr<const ServerState> FederationServer::state() const { return impl_->current(); }

std::string FederationServer::public_url() const { return impl_->url; }

std::vector<RequestLogEntry> FederationServer::request_log() const {
    std::lock_guard lock(impl_->log_mu);
    return impl_->log;
}

void FederationServer::clear_request_log() {
    std::lock_guard lock(impl_->log_mu);
    impl_->log.clear();
}

FingerprintProbe FederationServer::fingerprint_probe() const {
    std::lock_guard lock(impl_->log_mu);
    return impl_->probe;
}

std::map<std::string, std::string> FederationServer::last_refresh_errors() const {
    std::lock_guard lock(impl_->log_mu);
    return impl_->refresh_errors;
}

}  // namespace fedsql
