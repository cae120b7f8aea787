// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <mutex>
#include <set>
#include <thread>

#include "cluster.hpp"
#include "fedsql/error.hpp"
#include "fedsql/remote_client.hpp"

using namespace fedsql;
using namespace std::chrono_literals;
using testkit::Cluster;

namespace {

constexpr std::string_view kPhysics =
    "#table events\nid,run_id,energy\ninteger,integer,real\n1,10,0.5\n2,10,1.5\n3,11,2.5\n\n"
    "#table runs\nid,year\ninteger,integer\n10,2003\n11,2004\n";
constexpr std::string_view kCalib = "#table calib\nrun,gain\ninteger,real\n10,1.25\n11,0.75\n";

Error error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e;
    }
    ADD_FAILURE() << "no error thrown";
    return Error(ErrorCode::Internal, "");
}

/// Records any moment at which one handle serves two calls at once.
class ExclusiveHandleAdapter : public BackendAdapter {
public:
    explicit ExclusiveHandleAdapter(std::shared_ptr<ReferenceDriver> inner) : inner_(std::move(inner)) {}
    std::string driver_name() const override { return "exclusive"; }
    Handle open(const std::string& c, const std::string& u, const std::string& p) override {
        ++opens;
        return inner_->open(c, u, p);
    }
    ResultTable execute(Handle h, std::span<const std::string> f, std::span<const std::string> t,
                        const std::string& w) override {
        Use use(*this, h);
        std::this_thread::sleep_for(20ms);
        return inner_->execute(h, f, t, w);
    }
    std::vector<TableSchema> describe(Handle h) override {
        Use use(*this, h);
        return inner_->describe(h);
    }
    void close(Handle h) override { inner_->close(h); }

    std::atomic<int> overlaps{0};
    std::atomic<int> opens{0};

private:
    struct Use {
        ExclusiveHandleAdapter& a;
        Handle h;
        Use(ExclusiveHandleAdapter& owner, Handle handle) : a(owner), h(handle) {
            std::lock_guard lock(a.mu_);
            if (a.busy_.count(h) > 0) ++a.overlaps;
            a.busy_.insert(h);
        }
        ~Use() {
            std::lock_guard lock(a.mu_);
            a.busy_.erase(a.busy_.find(h));
        }
    };

    std::shared_ptr<ReferenceDriver> inner_;
    std::mutex mu_;
    std::multiset<Handle> busy_;
};

}  // namespace

TEST(FederationServer, ConcurrentQueriesNeverShareABackendHandle) {
    Cluster c;
    auto exclusive = std::make_shared<ExclusiveHandleAdapter>(c.driver);
    c.registry->add(exclusive);
    FederationServer& s = c.add_server();
    const std::string conn = c.attach("p", kPhysics);
    wire::RegisterRequest req = Cluster::inline_request(conn, c.introspected(conn, "p"));
    req.driver = "exclusive";
    s.register_database(req);
    std::vector<std::future<std::size_t>> results;
    for (int i = 0; i < 8; ++i) {
        results.push_back(std::async(std::launch::async, [&] { return s.query("SELECT id FROM events", false).rows.size(); }));
    }
    for (auto& r : results) EXPECT_EQ(r.get(), 3u);
    EXPECT_EQ(exclusive->overlaps.load(), 0);
    EXPECT_GT(exclusive->opens.load(), 1);
    s.shutdown();
}

TEST(FederationServer, HealthAndAddressInUse) {
    Cluster c;
    FederationServer& s = c.add_server();
    EXPECT_TRUE(remote_health(Endpoint{s.public_url()}));
    ServerConfig cfg = Cluster::quiet_config();
    cfg.listen_port = std::stoi(s.public_url().substr(s.public_url().rfind(':') + 1));
    FederationServer clash(cfg, c.registry);
    EXPECT_EQ(error_of([&] { clash.start(); }).code(), ErrorCode::AddressInUse);
}

TEST(FederationServer, RejectsNonPositiveRefreshInterval) {
    ServerConfig cfg;
    cfg.refresh_interval_seconds = 0;
    EXPECT_EQ(error_of([&] { FederationServer s(cfg, nullptr); }).code(), ErrorCode::InvalidArgument);
}

TEST(FederationServer, LocalQueryOverTheWire) {
    Cluster c;
    FederationServer& s = c.add_server();
    c.plug(s, "physics", kPhysics);
    const ResultTable r = remote_query(Endpoint{s.public_url()},
                                       "SELECT e.id FROM events e, runs r WHERE e.run_id = r.id AND r.year = 2003 ORDER BY e.id");
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_EQ(r.columns[0].name, "e.id");
    const Error unknown = error_of([&] { remote_query(Endpoint{s.public_url()}, "SELECT * FROM nowhere"); });
    EXPECT_EQ(unknown.remote_code(), "UnknownTable");
    const Error syntax = error_of([&] { remote_query(Endpoint{s.public_url()}, "SELECT FROM"); });
    EXPECT_EQ(syntax.remote_code(), "SyntaxError");
    EXPECT_TRUE(syntax.offset());
}

TEST(FederationServer, RegisteredTablesAreQueryableAndPublished) {
    Cluster c;
    FederationServer& s = c.add_server();
    EXPECT_EQ(c.plug(s, "physics", kPhysics), "physics");
    EXPECT_EQ(s.query("SELECT * FROM runs", false).rows.size(), 2u);
    EXPECT_EQ(rls_lookup(Endpoint{c.rls.base_url()}, "events"), std::vector<std::string>{s.public_url()});
    EXPECT_EQ(rls_lookup(Endpoint{c.rls.base_url()}, "runs"), std::vector<std::string>{s.public_url()});
}

TEST(FederationServer, FailedRegistrationLeavesStateUntouched) {
    Cluster c;
    FederationServer& s = c.add_server();
    c.plug(s, "physics", kPhysics);
    const wire::SchemaSnapshot before = s.schema();
    const auto state_before = s.state();

    // logical name collision
    const std::string conn = c.attach("other", "#table runs\nx\ninteger\n1\n");
    EXPECT_EQ(error_of([&] { s.register_database(Cluster::inline_request(conn, c.introspected(conn, "other"))); }).code(),
              ErrorCode::LogicalNameCollision);
    // unreachable database
    const std::string calib = c.attach("calib", kCalib);
    LowerSpec spec = c.introspected(calib, "calib");
    c.driver->set_offline(calib, true);
    EXPECT_EQ(error_of([&] { s.register_database(Cluster::inline_request(calib, spec)); }).code(),
              ErrorCode::BackendUnavailable);
    c.driver->set_offline(calib, false);
    // malformed spec
    wire::RegisterRequest bad = Cluster::inline_request(calib, spec);
    bad.spec_inline = "<xspec version=\"1\"><database>";
    EXPECT_EQ(error_of([&] { s.register_database(bad); }).code(), ErrorCode::MalformedSpec);
    // spec naming a table the database lacks
    LowerSpec wrong = spec;
    wrong.tables[0].physical_name = "CALIBRATION";
    EXPECT_EQ(error_of([&] { s.register_database(Cluster::inline_request(calib, wrong)); }).code(), ErrorCode::MalformedSpec);
    // same source twice
    EXPECT_EQ(error_of([&] {
                  s.register_database(Cluster::inline_request("mem:physics", c.introspected("mem:physics", "physics")));
              }).code(),
              ErrorCode::DuplicateSourceId);
    // unknown driver
    wire::RegisterRequest nodriver = Cluster::inline_request(calib, spec);
    nodriver.driver = "oracle9i";
    EXPECT_EQ(error_of([&] { s.register_database(nodriver); }).code(), ErrorCode::InvalidArgument);

    EXPECT_EQ(s.schema(), before);
    EXPECT_EQ(s.state(), state_before);
    EXPECT_TRUE(rls_lookup(Endpoint{c.rls.base_url()}, "calib").empty());
    EXPECT_EQ(c.driver->open_handle_count(), 1u);  // only physics stays open
}

TEST(FederationServer, RegisterFromSpecFile) {
    Cluster c;
    FederationServer& s = c.add_server();
    const std::string conn = c.attach("calib", kCalib);
    const auto path = std::filesystem::temp_directory_path() / "fedsql_calib_spec.xml";
    std::ofstream(path) << serialize_lower_spec(c.introspected(conn, "calib"));
    wire::RegisterRequest req;
    req.spec_url = path.string();
    req.driver = "reference";
    req.url = conn;
    EXPECT_EQ(remote_register(Endpoint{s.public_url()}, req), "calib");
    EXPECT_EQ(s.query("SELECT gain FROM calib WHERE run = 11", false).rows.size(), 1u);
    EXPECT_NE(s.schema().upper.find(path.string()), std::string::npos);
    std::filesystem::remove(path);
}

TEST(FederationServer, ForwardsRemoteTablesOnce) {
    Cluster c;
    FederationServer& a = c.add_server();
    FederationServer& b = c.add_server();
    c.plug(a, "physics", kPhysics);
    c.plug(b, "calib", kCalib);
    QueryTrace trace;
    const ResultTable r = a.query(
        "SELECT e.id, k.gain FROM events e, calib k WHERE e.run_id = k.run ORDER BY e.id", false, &trace);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_EQ(r.rows[2], (Row{Value{std::int64_t{3}}, Value{0.75}}));
    EXPECT_EQ(trace.forwarded_to, std::vector<std::string>{b.public_url()});
    const auto log = b.request_log();
    ASSERT_EQ(log.size(), 1u);
    EXPECT_TRUE(log[0].no_forward);
    EXPECT_EQ(log[0].outcome, "ok");
}

TEST(FederationServer, ForwardedRequestsNeverForwardAgain) {
    Cluster c;
    FederationServer& a = c.add_server();
    FederationServer& b = c.add_server();
    c.plug(b, "calib", kCalib);
    const Error e = error_of([&] { a.query("SELECT * FROM calib", true); });
    EXPECT_EQ(e.code(), ErrorCode::UnknownTable);
    EXPECT_TRUE(b.request_log().empty());
}

TEST(FederationServer, DeadPeerIsRemoteTimeout) {
    Cluster c;
    FederationServer& a = c.add_server();
    FederationServer& b = c.add_server();
    c.plug(a, "physics", kPhysics);
    c.plug(b, "calib", kCalib);
    const std::string b_url = b.public_url();
    // Stop serving without unpublishing: the RLS still points at b.
    b.shutdown();
    rls_publish(Endpoint{c.rls.base_url()}, b_url, {"calib"});
    const Error e = error_of([&] { a.query("SELECT e.id FROM events e, calib k WHERE e.run_id = k.run", false); });
    EXPECT_EQ(e.code(), ErrorCode::RemoteTimeout);
}

TEST(FederationServer, RefreshTracksAddedColumnAndDroppedTable) {
    Cluster c;
    FederationServer& s = c.add_server();
    auto store = load_reference_backend(kPhysics);
    const std::string conn = c.attach("physics", store);
    s.register_database(Cluster::inline_request(conn, c.introspected(conn, "physics")));
    EXPECT_TRUE(s.refresh_schemas().empty());

    store->add_column("events", {"quality", DataType::Text});
    EXPECT_EQ(s.refresh_schemas(), std::vector<std::string>{"physics"});
    EXPECT_EQ(s.query("SELECT quality FROM events", false).rows.size(), 3u);

    store->drop_table("runs");
    EXPECT_EQ(s.refresh_schemas(), std::vector<std::string>{"physics"});
    EXPECT_EQ(error_of([&] { s.query("SELECT * FROM runs", false); }).code(), ErrorCode::UnknownTable);
    EXPECT_TRUE(rls_lookup(Endpoint{c.rls.base_url()}, "runs").empty());
    EXPECT_TRUE(s.refresh_schemas().empty());
}

TEST(FederationServer, RefreshKeepsCuratedLogicalNames) {
    Cluster c;
    FederationServer& s = c.add_server();
    auto store = load_reference_backend("#table EVT_T\nEID\ninteger\n1\n");
    const std::string conn = c.attach("p", store);
    LowerSpec spec = c.introspected(conn, "p");
    spec.tables[0].logical_name = "events";
    spec.tables[0].columns[0].logical_name = "event_id";
    s.register_database(Cluster::inline_request(conn, spec));
    store->add_column("EVT_T", {"E", DataType::Real});
    EXPECT_EQ(s.refresh_schemas(), std::vector<std::string>{"p"});
    EXPECT_EQ(s.query("SELECT event_id, E FROM events", false).width(), 2u);
}

TEST(FederationServer, RefreshSkipsUnavailableSources) {
    Cluster c;
    FederationServer& s = c.add_server();
    auto a = load_reference_backend("#table ta\nx\ninteger\n1\n");
    auto b = load_reference_backend("#table tb\nx\ninteger\n1\n");
    c.attach("a", a);
    c.attach("b", b);
    s.register_database(Cluster::inline_request("mem:a", c.introspected("mem:a", "a")));
    s.register_database(Cluster::inline_request("mem:b", c.introspected("mem:b", "b")));
    a->add_column("ta", {"y", DataType::Integer});
    b->add_column("tb", {"y", DataType::Integer});
    c.driver->set_offline("mem:a", true);
    EXPECT_EQ(s.refresh_schemas(), std::vector<std::string>{"b"});
    EXPECT_EQ(s.last_refresh_errors().count("a"), 1u);
    c.driver->set_offline("mem:a", false);
    EXPECT_EQ(s.refresh_schemas(), std::vector<std::string>{"a"});
}

TEST(FederationServer, TimerRefreshesWithinOneInterval) {
    Cluster c;
    ServerConfig cfg = Cluster::quiet_config();
    cfg.auto_refresh = true;
    cfg.refresh_interval_seconds = 0.2;
    FederationServer& s = c.add_server(cfg);
    auto store = load_reference_backend("#table t\nx\ninteger\n1\n");
    c.attach("p", store);
    s.register_database(Cluster::inline_request("mem:p", c.introspected("mem:p", "p")));
    store->add_column("t", {"y", DataType::Integer});
    const auto deadline = std::chrono::steady_clock::now() + 200ms + 1s;
    bool seen = false;
    while (!seen && std::chrono::steady_clock::now() < deadline) {
        try {
            s.query("SELECT y FROM t", false);
            seen = true;
        } catch (const Error&) {
            std::this_thread::sleep_for(20ms);
        }
    }
    EXPECT_TRUE(seen);
}

TEST(FederationServer, ShutdownDrainsInFlightQueries) {
    Cluster c;
    auto slow = std::make_shared<testkit::SlowAdapter>(c.driver, 600ms);
    c.registry->add(slow);
    FederationServer& s = c.add_server();
    const std::string conn = c.attach("p", "#table t\nx\ninteger\n1\n");
    wire::RegisterRequest req = Cluster::inline_request(conn, c.introspected(conn, "p"));
    req.driver = "slow";
    s.register_database(req);

    const Endpoint ep{s.public_url(), 5s, 1s};
    auto inflight = std::async(std::launch::async, [&] {
        try {
            return remote_query(ep, "SELECT x FROM t").rows.size() == 1 ? std::string("ok") : std::string("bad");
        } catch (const Error& e) {
            return e.remote_code().empty() ? std::string(error_code_name(e.code())) : e.remote_code();
        }
    });
    std::this_thread::sleep_for(150ms);
    const auto start = std::chrono::steady_clock::now();
    s.shutdown();
    EXPECT_LT(std::chrono::steady_clock::now() - start, 3s);
    ASSERT_EQ(inflight.wait_for(3s), std::future_status::ready);
    const std::string outcome = inflight.get();
    EXPECT_TRUE(outcome == "ok" || outcome == "Shutdown") << outcome;
    EXPECT_EQ(error_of([&] { s.query("SELECT x FROM t", false); }).code(), ErrorCode::Shutdown);
}

TEST(FederationServer, LoadsUpperSpecAtStartup) {
    Cluster c;
    const std::string conn = c.attach("physics", kPhysics);
    LowerSpec spec = c.introspected(conn, "physics");
    spec.tables[0].logical_name = "evts";
    const std::string upper =
        "<xspec-federation version=\"1\">\n"
        "  <source id=\"physics\" url=\"mem:physics\" driver=\"reference\" spec=\"physics.xml\"/>\n"
        "</xspec-federation>\n";
    ServerConfig cfg = Cluster::quiet_config();
    cfg.rls_url = c.rls.base_url();
    FederationServer s(cfg, c.registry);
    s.load_upper_spec(upper, [&](const std::string&) { return std::optional<std::string>(serialize_lower_spec(spec)); });
    s.start();
    EXPECT_EQ(s.query("SELECT id FROM evts", false).rows.size(), 3u);
    EXPECT_EQ(rls_lookup(Endpoint{c.rls.base_url()}, "evts"), std::vector<std::string>{s.public_url()});
    EXPECT_EQ(s.schema().upper, upper);
    s.shutdown();
    EXPECT_TRUE(rls_lookup(Endpoint{c.rls.base_url()}, "evts").empty());
}
