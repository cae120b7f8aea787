// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/bench.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "fedsql/catalog.hpp"
#include "fedsql/error.hpp"
#include "fedsql/fedserver.hpp"
#include "fedsql/ntuple.hpp"
#include "fedsql/remote_client.hpp"
#include "fedsql/rls.hpp"

namespace fedsql {

namespace {

using Clock = std::chrono::steady_clock;

std::string fixed3(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
    return std::string(buf, p);
}

/// One timed round trip; returns (ms, rows).
std::pair<double, std::size_t> timed_query(const Endpoint& ep, const std::string& sql) {
    const auto start = Clock::now();
    ResultTable r;
    try {
        r = remote_query(ep, sql);
    } catch (const Error& e) {
        throw Error(ErrorCode::ScenarioUnavailable, ep.base_url + ": " + e.what()).with_target(ep.base_url);
    }
    return {std::chrono::duration<double, std::milli>(Clock::now() - start).count(), r.rows.size()};
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0;
    const double m = mean_of(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / (v.size() - 1));
}

}  // namespace

BenchReport bench_latency(const LatencyScenario& scenario) {
    if (scenario.repetitions < 5) throw Error(ErrorCode::InvalidArgument, "at least 5 repetitions are required");
    std::set<std::string> servers;
    for (const auto& q : scenario.queries) servers.insert(q.server);
    for (const auto& s : servers) {
        if (!remote_health(Endpoint{s, scenario.timeout, std::chrono::milliseconds(2'000)})) {
            throw Error(ErrorCode::ScenarioUnavailable, "server " + s + " is not answering").with_target(s);
        }
    }
    BenchReport report;
    for (const auto& q : scenario.queries) {
        const Endpoint ep{q.server, scenario.timeout, std::chrono::milliseconds(2'000)};
        for (int i = 0; i < scenario.warmup; ++i) timed_query(ep, q.sql);
        LatencyRow row;
        row.query = q;
        for (int i = 0; i < scenario.repetitions; ++i) {
            auto [ms, rows] = timed_query(ep, q.sql);
            row.samples_ms.push_back(ms);
            row.rows_returned = rows;
        }
        row.mean_ms = mean_of(row.samples_ms);
        row.stddev_ms = stddev_of(row.samples_ms);
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string latency_csv(const BenchReport& report) {
    std::string out = "label,servers,distributed,tables,rows_returned,mean_ms,stddev_ms,repetitions\r\n";
    for (const auto& r : report.rows) {
        out += csv_field(r.query.label) + "," + std::to_string(r.query.servers_touched) + "," +
               (r.query.distributed ? "true" : "false") + "," + std::to_string(r.query.tables_touched) + "," +
               std::to_string(r.rows_returned) + "," + fixed3(r.mean_ms) + "," + fixed3(r.stddev_ms) + "," +
               std::to_string(r.samples_ms.size()) + "\r\n";
    }
    return out;
}

std::vector<ScalingPoint> bench_scaling(const std::string& server, const std::string& table,
                                        const std::vector<std::size_t>& counts, int repetitions,
                                        std::chrono::milliseconds timeout) {
    if (repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be positive");
    std::vector<ScalingPoint> out;
    if (counts.empty()) return out;
    const Endpoint ep{server, timeout, std::chrono::milliseconds(2'000)};
    if (!remote_health(ep)) throw Error(ErrorCode::ScenarioUnavailable, "server " + server + " is not answering");
    auto sql_for = [&](std::size_t n) {
        return "SELECT * FROM " + table + " WHERE event_id <= " + std::to_string(n);
    };
    timed_query(ep, sql_for(counts.front()));  // warm-up
    for (std::size_t n : counts) {
        std::vector<double> samples;
        std::size_t rows = 0;
        for (int i = 0; i < repetitions; ++i) {
            auto [ms, r] = timed_query(ep, sql_for(n));
            samples.push_back(ms);
            rows = r;
        }
        out.push_back({n, rows, mean_of(samples)});
    }
    return out;
}

std::string scaling_csv(const std::vector<ScalingPoint>& points) {
    std::string out = "rows_returned,response_ms\r\n";
    for (const auto& p : points) out += std::to_string(p.rows_returned) + "," + fixed3(p.response_ms) + "\r\n";
    return out;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two points");
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit fit;
    if (sxx == 0) throw Error(ErrorCode::InvalidArgument, "x values are all equal");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += e * e;
    }
    fit.r_squared = syy == 0 ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

struct LocalScenario::Impl {
    std::shared_ptr<ReferenceDriver> driver = std::make_shared<ReferenceDriver>();
    std::shared_ptr<DriverRegistry> registry = std::make_shared<DriverRegistry>();
    RlsServer rls;
    std::unique_ptr<FederationServer> a;
    std::unique_ptr<FederationServer> b;
    std::int64_t events = 0;

    std::unique_ptr<FederationServer> make_server() {
        ServerConfig cfg;
        cfg.rls_url = rls.base_url();
        cfg.auto_refresh = false;
        cfg.row_cap = 10'000'000;
        auto s = std::make_unique<FederationServer>(cfg, registry);
        s->start();
        return s;
    }

    /// Attaches a store holding `table` and registers it on `server` as database `db`.
    void add_database(FederationServer& server, const std::string& db, FixtureTable table) {
        auto store = std::make_shared<ReferenceBackend>(std::vector<FixtureTable>{std::move(table)});
        const std::string conn = "mem:" + db;
        driver->attach(db, store);
        const Handle h = driver->open(conn, "", "");
        const LowerSpec spec = introspect(*driver, h, db);
        driver->close(h);
        wire::RegisterRequest req;
        req.spec_inline = serialize_lower_spec(spec);
        req.driver = driver->driver_name();
        req.url = conn;
        server.register_database(req);
    }
};

LocalScenario::LocalScenario(const LocalScenarioOptions& options) : impl_(std::make_unique<Impl>()) {
    Impl& im = *impl_;
    im.registry->add(im.driver);
    im.events = options.events;
    im.rls.start("127.0.0.1", 0);
    im.a = im.make_server();
    im.b = im.make_server();
    for (int i = 1; i <= 4; ++i) {
        const std::string n = std::to_string(i);
        FixtureTable t = generate_ntuple({options.events, options.vars, static_cast<std::uint64_t>(i)}, "nt" + n);
        im.add_database(i <= 2 ? *im.a : *im.b, "db" + n, std::move(t));
    }
    im.add_database(*im.a, "scaling",
                    generate_ntuple({options.scaling_events, options.scaling_vars, 99}, kScalingTable));
}

LocalScenario::~LocalScenario() {
    if (impl_->a) impl_->a->shutdown();
    if (impl_->b) impl_->b->shutdown();
    impl_->rls.stop();
}

LatencyScenario LocalScenario::latency_scenario(int repetitions) const {
    const std::string a = server_a();
    const std::string limit = std::to_string(impl_->events / 2);
    LatencyScenario s;
    s.repetitions = repetitions;
    s.queries.push_back({"local-1-table", a, "SELECT * FROM nt1 WHERE event_id <= " + limit, 1, false, 1});
    s.queries.push_back({"distributed-2-table", a,
                         "SELECT * FROM nt1, nt2 WHERE nt1.event_id = nt2.event_id AND nt1.event_id <= " + limit, 1,
                         true, 2});
    s.queries.push_back({"distributed-2-server-4-table", a,
                         "SELECT * FROM nt1, nt2, nt3, nt4 WHERE nt1.event_id = nt2.event_id AND nt2.event_id = "
                         "nt3.event_id AND nt3.event_id = nt4.event_id AND nt1.event_id <= " +
                             limit,
                         2, true, 4});
    return s;
}

std::string LocalScenario::server_a() const { return impl_->a->public_url(); }
std::string LocalScenario::server_b() const { return impl_->b->public_url(); }
std::string LocalScenario::rls() const { return impl_->rls.base_url(); }

void LocalScenario::stop_server_b() { impl_->b->shutdown(); }

}  // namespace fedsql
