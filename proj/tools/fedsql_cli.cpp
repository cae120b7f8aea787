// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fedsql/bench.hpp"
#include "fedsql/catalog.hpp"
#include "fedsql/error.hpp"
#include "fedsql/etl.hpp"
#include "fedsql/federation.hpp"
#include "fedsql/fedserver.hpp"
#include "fedsql/ntuple.hpp"
#include "fedsql/remote_client.hpp"
#include "fedsql/rls.hpp"

namespace fs = std::filesystem;
using namespace fedsql;

namespace {

// Exit codes, one per error family.
constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitQuery = 3;
constexpr int kExitCatalog = 4;
constexpr int kExitUnavailable = 5;
constexpr int kExitData = 6;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
            return kExitUsage;
        case ErrorCode::SyntaxError:
        case ErrorCode::UnsupportedFeature:
        case ErrorCode::UnknownColumn:
        case ErrorCode::UnknownTable:
        case ErrorCode::TypeMismatch:
        case ErrorCode::AmbiguousColumn:
        case ErrorCode::CrossProductRejected:
        case ErrorCode::ResultTooLarge:
            return kExitQuery;
        case ErrorCode::MalformedSpec:
        case ErrorCode::DuplicateName:
        case ErrorCode::DanglingRelationship:
        case ErrorCode::DuplicateSourceId:
        case ErrorCode::UnresolvableRef:
        case ErrorCode::LogicalNameCollision:
            return kExitCatalog;
        case ErrorCode::BackendUnavailable:
        case ErrorCode::RemoteError:
        case ErrorCode::RemoteTimeout:
        case ErrorCode::DecodeError:
        case ErrorCode::MalformedRequest:
        case ErrorCode::MalformedUrl:
        case ErrorCode::AddressInUse:
        case ErrorCode::Shutdown:
        case ErrorCode::ScenarioUnavailable:
            return kExitUnavailable;
        case ErrorCode::MalformedFixture:
        case ErrorCode::StageWriteFailed:
        case ErrorCode::MalformedStage:
            return kExitData;
        case ErrorCode::Internal:
            break;
    }
    return kExitInternal;
}

int exit_code_for(const Error& e) {
    // A server's own verdict is more useful than "the call failed".
    if (e.code() == ErrorCode::RemoteError && !e.remote_code().empty()) {
        if (auto inner = error_code_from_name(e.remote_code())) {
            if (*inner != ErrorCode::InvalidArgument) return exit_code_for(*inner);
        }
    }
    return exit_code_for(e.code());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
}

std::pair<std::string, std::string> split_pair(const std::string& s, char sep, const char* what) {
    const auto pos = s.find(sep);
    if (pos == std::string::npos || pos == 0 || pos + 1 == s.size()) {
        throw Error(ErrorCode::InvalidArgument, std::string("expected ") + what + ", got '" + s + "'");
    }
    return {s.substr(0, pos), s.substr(pos + 1)};
}

std::string as_connection(const std::string& path_or_conn) {
    if (path_or_conn.rfind("file:", 0) == 0 || path_or_conn.rfind("mem:", 0) == 0) return path_or_conn;
    return "file:" + path_or_conn;
}

/// `id=fixture-path` sources served by the reference driver.
std::vector<SourceDefinition> fixture_sources(const std::vector<std::string>& specs,
                                              const std::shared_ptr<ReferenceDriver>& driver) {
    std::vector<SourceDefinition> out;
    for (const auto& s : specs) {
        auto [id, path] = split_pair(s, '=', "<id>=<fixture>");
        out.push_back({id, driver, as_connection(path), "", "", std::nullopt});
    }
    return out;
}

TargetStore fixture_target(const std::string& path, const std::shared_ptr<ReferenceDriver>& driver) {
    if (!fs::exists(path)) std::ofstream(path).flush();  // an empty fixture is an empty database
    return TargetStore{driver, as_connection(path), "", "", };
}

std::vector<LatencyQuery> read_scenario(const std::string& path) {
    std::vector<LatencyQuery> out;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, '\t')) f.push_back(field);
        if (f.size() != 6) {
            throw Error(ErrorCode::InvalidArgument,
                        path + ":" + std::to_string(n) + ": expected label, server, servers, distributed, tables, sql");
        }
        out.push_back({f[0], f[1], f[5], std::stoi(f[2]), f[3] == "true" || f[3] == "1", std::stoi(f[4])});
    }
    return out;
}

/// Blocks until SIGINT or SIGTERM. Must be called with both signals blocked.
void wait_for_signal() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    int sig = 0;
    sigwait(&set, &sig);
}

void block_signals() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated SQL over heterogeneous relational sources"};
    app.require_subcommand(1);

    // query
    auto* query = app.add_subcommand("query", "Run a query against a server or local fixtures");
    std::string q_server, q_sql;
    std::vector<std::string> q_sources;
    bool q_no_forward = false;
    query->add_option("--server", q_server, "Federation server base URL");
    query->add_option("--source", q_sources, "Local source <id>=<fixture>, repeatable");
    query->add_flag("--no-forward", q_no_forward, "Ask the server not to forward");
    query->add_option("sql", q_sql, "SELECT statement")->required();

    // register
    auto* reg = app.add_subcommand("register", "Plug a database into a running server");
    std::string r_server, r_spec_url, r_spec_file, r_driver = "reference", r_url, r_user, r_pass;
    reg->add_option("--server", r_server)->required();
    auto* spec_url_opt = reg->add_option("--spec-url", r_spec_url, "Spec location the server downloads");
    reg->add_option("--spec-file", r_spec_file, "Spec sent inline")->excludes(spec_url_opt);
    reg->add_option("--driver", r_driver);
    reg->add_option("--url", r_url, "Database location")->required();
    reg->add_option("--username", r_user);
    reg->add_option("--password", r_pass);

    // introspect
    auto* intro = app.add_subcommand("introspect", "Print a catalog generated from a fixture database");
    std::string i_fixture, i_name, i_out;
    intro->add_option("--fixture", i_fixture)->required();
    intro->add_option("--name", i_name, "Database logical name")->required();
    intro->add_option("-o,--output", i_out);

    // etl run
    auto* etl = app.add_subcommand("etl", "Warehouse loading");
    etl->require_subcommand(1);
    auto* etl_run = etl->add_subcommand("run", "Run a job file");
    std::string e_job, e_warehouse, e_mart, e_stage = fs::temp_directory_path().string(), e_timings;
    std::vector<std::string> e_sources;
    bool e_direct = false;
    std::size_t e_cell_cap = ExecutionOptions{}.max_cells;
    etl_run->add_option("--job", e_job)->required();
    etl_run->add_option("--source", e_sources, "Source <id>=<fixture>, repeatable")->required();
    etl_run->add_option("--warehouse", e_warehouse, "Warehouse fixture file")->required();
    etl_run->add_option("--mart", e_mart, "Data mart fixture file");
    etl_run->add_option("--stage-dir", e_stage);
    etl_run->add_flag("--direct", e_direct, "Transfer in memory, no stage file");
    etl_run->add_option("--timings", e_timings, "Timings CSV path (default stdout)");
    etl_run->add_option("--cell-cap", e_cell_cap, "Largest intermediate result, in cells");

    // serve
    auto* serve = app.add_subcommand("serve", "Run a federation server");
    std::string s_host = "127.0.0.1", s_rls, s_upper, s_public;
    int s_port = 8080;
    double s_interval = 30;
    std::size_t s_row_cap = 1'000'000;
    std::vector<std::string> s_creds;
    serve->add_option("--host", s_host);
    serve->add_option("--port", s_port);
    serve->add_option("--rls", s_rls, "RLS base URL");
    serve->add_option("--upper-spec", s_upper, "Upper-level catalog to load at startup");
    serve->add_option("--public-url", s_public);
    serve->add_option("--refresh-interval", s_interval)->check(CLI::PositiveNumber);
    serve->add_option("--row-cap", s_row_cap);
    serve->add_option("--credentials", s_creds, "<source_id>=<user>:<password>, repeatable");

    // rls-serve
    auto* rls = app.add_subcommand("rls-serve", "Run a replica location service");
    std::string l_host = "127.0.0.1";
    int l_port = 8090;
    rls->add_option("--host", l_host);
    rls->add_option("--port", l_port);

    // bench
    auto* bench = app.add_subcommand("bench", "Measure response times");
    bench->require_subcommand(1);
    auto* latency = bench->add_subcommand("latency", "Latency per query shape");
    std::string b_scenario;
    int b_reps = 5;
    latency->add_option("--scenario", b_scenario, "Tab-separated scenario file; default launches a local one");
    latency->add_option("--repetitions", b_reps)->check(CLI::Range(5, 1000));
    auto* scaling = bench->add_subcommand("scaling", "Response time versus rows returned");
    std::vector<std::size_t> b_counts{21, 500, 1000, 1500, 2000, 2551};
    std::string b_server, b_table = LocalScenario::kScalingTable;
    int b_scale_reps = 5;
    scaling->add_option("--counts", b_counts)->delimiter(',');
    scaling->add_option("--server", b_server, "Server to measure; default launches a local one");
    scaling->add_option("--table", b_table);
    scaling->add_option("--repetitions", b_scale_reps)->check(CLI::PositiveNumber);

    // gen-ntuple
    auto* gen = app.add_subcommand("gen-ntuple", "Write a generated ntuple fixture");
    NtupleSpec g_spec;
    std::string g_out, g_table = "ntuple";
    gen->add_option("--events", g_spec.n_events)->required()->check(CLI::PositiveNumber);
    gen->add_option("--vars", g_spec.n_vars)->required()->check(CLI::PositiveNumber);
    gen->add_option("--seed", g_spec.seed);
    gen->add_option("--table", g_table);
    gen->add_option("-o,--output", g_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        auto driver = std::make_shared<ReferenceDriver>();

        if (*query) {
            ResultTable result;
            if (!q_server.empty()) {
                result = remote_query(Endpoint{q_server}, q_sql, q_no_forward);
            } else if (!q_sources.empty()) {
                LocalFederation fed(fixture_sources(q_sources, driver));
                result = fed.query(q_sql);
            } else {
                throw Error(ErrorCode::InvalidArgument, "query needs --server or at least one --source");
            }
            std::cout << to_csv(result);
        } else if (*reg) {
            wire::RegisterRequest req;
            if (!r_spec_file.empty()) {
                req.spec_inline = read_file(r_spec_file);
            } else if (!r_spec_url.empty()) {
                req.spec_url = r_spec_url;
            } else {
                throw Error(ErrorCode::InvalidArgument, "register needs --spec-url or --spec-file");
            }
            req.driver = r_driver;
            req.url = r_url;
            req.username = r_user;
            req.password = r_pass;
            std::cout << remote_register(Endpoint{r_server}, req) << "\n";
        } else if (*intro) {
            const Handle h = driver->open(as_connection(i_fixture), "", "");
            const LowerSpec spec = introspect(*driver, h, i_name);
            driver->close(h);
            write_output(i_out, serialize_lower_spec(spec));
        } else if (*etl_run) {
            const EtlJob job = parse_job(read_file(e_job));
            const TargetStore warehouse = fixture_target(e_warehouse, driver);
            std::optional<TargetStore> mart;
            if (!e_mart.empty()) mart = fixture_target(e_mart, driver);
            JobOptions opts;
            opts.stage_dir = e_stage;
            opts.direct = e_direct;
            opts.execution.max_cells = e_cell_cap;
            const JobReport report =
                run_job(job, fixture_sources(e_sources, driver), warehouse, "warehouse", mart ? &*mart : nullptr, opts);
            std::vector<PhaseTiming> timings;
            for (const auto& s : report.steps) timings.push_back(s.timing);
            write_output(e_timings, timings_csv(timings));
        } else if (*serve) {
            ServerConfig cfg;
            cfg.listen_host = s_host;
            cfg.listen_port = s_port;
            cfg.rls_url = s_rls;
            cfg.public_url = s_public;
            cfg.refresh_interval_seconds = s_interval;
            cfg.row_cap = s_row_cap;
            for (const auto& c : s_creds) {
                auto [id, rest] = split_pair(c, '=', "<id>=<user>:<password>");
                auto colon = rest.find(':');
                cfg.credentials[id] = {rest.substr(0, colon), colon == std::string::npos ? "" : rest.substr(colon + 1)};
            }
            auto registry = std::make_shared<DriverRegistry>();
            registry->add(driver);
            block_signals();
            FederationServer server(cfg, registry);
            if (!s_upper.empty()) {
                const fs::path base = fs::path(s_upper).parent_path();
                server.load_upper_spec(read_file(s_upper), [&](const std::string& ref) -> std::optional<std::string> {
                    try {
                        const bool remote = ref.rfind("http://", 0) == 0 || ref.rfind("https://", 0) == 0;
                        std::string target = ref;
                        if (!remote) {
                            fs::path p = ref.rfind("file:", 0) == 0 ? fs::path(ref.substr(5)) : fs::path(ref);
                            if (p.is_relative()) p = base / p;
                            target = p.string();
                        }
                        return fetch_spec_document(target);
                    } catch (const Error&) {
                        return std::nullopt;
                    }
                });
            }
            server.start();
            std::cout << server.public_url() << std::endl;
            wait_for_signal();
            server.shutdown();
        } else if (*rls) {
            block_signals();
            RlsServer server;
            server.start(l_host, l_port);
            std::cout << server.base_url() << std::endl;
            wait_for_signal();
            server.stop();
        } else if (*latency) {
            if (!b_scenario.empty()) {
                LatencyScenario s;
                s.queries = read_scenario(b_scenario);
                s.repetitions = b_reps;
                std::cout << latency_csv(bench_latency(s));
            } else {
                LocalScenario local;
                std::cout << latency_csv(bench_latency(local.latency_scenario(b_reps)));
            }
        } else if (*scaling) {
            if (!b_server.empty()) {
                std::cout << scaling_csv(bench_scaling(b_server, b_table, b_counts, b_scale_reps));
            } else {
                LocalScenario local;
                std::cout << scaling_csv(bench_scaling(local.server_a(), b_table, b_counts, b_scale_reps));
            }
        } else if (*gen) {
            write_output(g_out, generate_ntuple_fixture(g_spec, g_table));
        }
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << error_code_name(e.code());
        if (!e.remote_code().empty()) std::cerr << " (" << e.remote_code() << ")";
        std::cerr << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
