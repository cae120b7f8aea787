// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

namespace fedsql {

/// One query of a latency scenario, sent to `server` by an HTTP client.
struct LatencyQuery {
    std::string label;
    std::string server;
    std::string sql;
    int servers_touched = 1;
    bool distributed = false;
    int tables_touched = 1;
};

struct LatencyScenario {
    std::vector<LatencyQuery> queries;
    int repetitions = 5;
    int warmup = 1;
    std::chrono::milliseconds timeout{30'000};
};

struct LatencyRow {
    LatencyQuery query;
    std::size_t rows_returned = 0;
    std::vector<double> samples_ms;
    double mean_ms = 0;
    double stddev_ms = 0;  ///< sample standard deviation
};

struct BenchReport {
    std::vector<LatencyRow> rows;
};

/// Checks every server's health first; any unreachable server or failing
/// query is ScenarioUnavailable. Throws InvalidArgument for repetitions < 5.
BenchReport bench_latency(const LatencyScenario& scenario);

/// `label,servers,distributed,tables,rows_returned,mean_ms,stddev_ms,repetitions`
std::string latency_csv(const BenchReport& report);

struct ScalingPoint {
    std::size_t requested = 0;
    std::size_t rows_returned = 0;
    double response_ms = 0;  ///< mean over the repetitions
};

/// Runs `SELECT * FROM <table> WHERE event_id <= N` for each count against a
/// server holding an ntuple table with ids 1..M.
std::vector<ScalingPoint> bench_scaling(const std::string& server, const std::string& table,
                                        const std::vector<std::size_t>& counts, int repetitions = 5,
                                        std::chrono::milliseconds timeout = std::chrono::seconds(30));

/// `rows_returned,response_ms`
std::string scaling_csv(const std::vector<ScalingPoint>& points);

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
};

/// Ordinary least squares; r_squared is 1 when y is constant.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct LocalScenarioOptions {
    std::int64_t events = 2000;     ///< rows per latency table
    std::int64_t vars = 20;
    std::int64_t scaling_events = 3000;
    std::int64_t scaling_vars = 200;
};

/// An RLS and two federation servers on loopback, populated with ntuple
/// tables: server A holds databases db1 (nt1) and db2 (nt2) plus the scaling
/// table, server B holds db3 (nt3) and db4 (nt4).
class LocalScenario {
public:
    explicit LocalScenario(const LocalScenarioOptions& options = {});
    ~LocalScenario();

    LocalScenario(const LocalScenario&) = delete;
    LocalScenario& operator=(const LocalScenario&) = delete;

    /// The three latency shapes: one local table, two tables in two databases
    /// of one server, four tables over two servers.
    LatencyScenario latency_scenario(int repetitions = 5) const;

    std::string server_a() const;
    std::string server_b() const;
    std::string rls() const;
    static constexpr const char* kScalingTable = "wide";

    /// Stops server B, for exercising the unavailable path.
    void stop_server_b();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fedsql
