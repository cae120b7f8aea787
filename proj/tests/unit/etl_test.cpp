// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fedsql/error.hpp"
#include "fedsql/etl.hpp"

using namespace fedsql;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Internal;
}

std::vector<Row> sorted(std::vector<Row> rows) {
    std::sort(rows.begin(), rows.end(), canonical_row_less);
    return rows;
}

constexpr std::string_view kJob = R"(# star schema for the physics mart
target fact_events
query SELECT e.id, e.energy, r.year, d.name FROM events e, runs r, detectors d WHERE e.run_id = r.id AND e.det = d.id
map event_id=0:integer
map energy=1:real
map year=2:integer
map detector=3:text

view all_events
query SELECT * FROM fact_events

view hot_events
query SELECT f.event_id, f.energy FROM fact_events f WHERE f.energy > 0.5

view by_year
query SELECT f.event_id, y.year, f.detector FROM fact_events f, fact_events y WHERE f.event_id = y.event_id AND y.year >= 2004
)";

/// events in one store, runs and detectors in another, plus the same three
/// tables in a single reference store used as the answer key.
struct Sources {
    std::shared_ptr<ReferenceDriver> driver = std::make_shared<ReferenceDriver>();
    std::shared_ptr<ReferenceBackend> oracle = std::make_shared<ReferenceBackend>();
    std::shared_ptr<ReferenceBackend> warehouse = std::make_shared<ReferenceBackend>();
    std::shared_ptr<ReferenceBackend> mart = std::make_shared<ReferenceBackend>();
    std::vector<SourceDefinition> defs;
    fs::path stage_dir;

    explicit Sources(int n_events, std::uint64_t seed = 1, const std::string& tag = "etl") {
        std::mt19937_64 rng(seed);
        FixtureTable events{"events", {{"id", DataType::Integer}, {"run_id", DataType::Integer},
                                       {"det", DataType::Integer}, {"energy", DataType::Real}}, {}};
        for (int i = 1; i <= n_events; ++i) {
            events.rows.push_back({Value{std::int64_t{i}}, Value{std::int64_t(10 + rng() % 5)},
                                   Value{std::int64_t(rng() % 3)}, Value{double(rng() % 100) / 100.0}});
        }
        FixtureTable runs{"runs", {{"id", DataType::Integer}, {"year", DataType::Integer}}, {}};
        for (int r = 10; r < 15; ++r) runs.rows.push_back({Value{std::int64_t{r}}, Value{std::int64_t(2000 + r - 8)}});
        FixtureTable dets{"detectors", {{"id", DataType::Integer}, {"name", DataType::Text}}, {}};
        for (int d = 0; d < 3; ++d) dets.rows.push_back({Value{std::int64_t{d}}, Value{"det, \"" + std::to_string(d) + "\""}});

        for (const auto& t : {events, runs, dets}) oracle->put_table(t);
        driver->attach(tag + "_a", std::make_shared<ReferenceBackend>(std::vector<FixtureTable>{events}));
        driver->attach(tag + "_b", std::make_shared<ReferenceBackend>(std::vector<FixtureTable>{runs, dets}));
        driver->attach(tag + "_wh", warehouse);
        driver->attach(tag + "_mart", mart);
        defs.push_back({"a", driver, "mem:" + tag + "_a", "", "", std::nullopt});
        defs.push_back({"b", driver, "mem:" + tag + "_b", "", "", std::nullopt});
        stage_dir = fs::temp_directory_path() / ("fedsql_" + tag + "_stage");
        fs::remove_all(stage_dir);
    }

    ~Sources() { fs::remove_all(stage_dir); }

    TargetStore wh_target() const { return {driver, "mem:" + tag_of(defs[0].url) + "_wh", "", ""}; }
    TargetStore mart_target() const { return {driver, "mem:" + tag_of(defs[0].url) + "_mart", "", ""}; }

    static std::string tag_of(const std::string& url) { return url.substr(4, url.size() - 6); }
};

}  // namespace

TEST(EtlJob, ParsesBlocks) {
    const EtlJob job = parse_job(kJob);
    ASSERT_EQ(job.mappings.size(), 1u);
    EXPECT_EQ(job.mappings[0].target_table, "fact_events");
    EXPECT_EQ(job.mappings[0].columns[3], (ColumnMapping{"detector", 3, DataType::Text}));
    ASSERT_EQ(job.views.size(), 3u);
    EXPECT_EQ(job.views[1].query, "SELECT f.event_id, f.energy FROM fact_events f WHERE f.energy > 0.5");
}

TEST(EtlJob, ReportsLineNumbers) {
    const auto message_of = [](std::string_view text) {
        try {
            parse_job(text);
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message_of("target t\nquery SELECT a FROM x\nmap a=zero:integer\n").find("3"), std::string::npos);
    EXPECT_NE(message_of("map a=0:integer\n").find("1"), std::string::npos);
    EXPECT_NE(message_of("target t\nmap a=0:integer\n").find("has no query"), std::string::npos);
    EXPECT_NE(message_of("target t\nquery SELECT a FROM x\nmap a=0:blob\n").find("blob"), std::string::npos);
    EXPECT_NE(message_of("view v\n").find("has no query"), std::string::npos);
    EXPECT_NE(message_of("frobnicate\n").find("frobnicate"), std::string::npos);
}

TEST(EtlMapping, IndexCheckedBeforeAnythingRuns) {
    Sources s(20, 1, "idx");
    EtlJob job = parse_job(kJob);
    StarMapping second = job.mappings[0];
    second.target_table = "fact_bad";
    second.columns[1].source_index = 4;
    job.mappings.push_back(second);
    EXPECT_EQ(code_of([&] { run_job(job, s.defs, s.wh_target(), "wh", nullptr, {s.stage_dir}); }),
              ErrorCode::InvalidArgument);
    EXPECT_TRUE(s.warehouse->tables().empty());
    EXPECT_FALSE(fs::exists(s.stage_dir / "fact_events.stage"));
}

TEST(EtlMapping, StarWidthComesFromTheCatalog) {
    Sources s(5, 1, "star");
    LocalFederation fed(s.defs);
    StarMapping m{"t", "SELECT * FROM runs", {{"id", 0, DataType::Integer}, {"year", 1, DataType::Integer}}};
    EXPECT_NO_THROW(validate_mapping(m, fed.dictionary()));
    m.columns.push_back({"extra", 2, DataType::Integer});
    EXPECT_EQ(code_of([&] { validate_mapping(m, fed.dictionary()); }), ErrorCode::InvalidArgument);
    m.columns = {{"id", 0, DataType::Integer}, {"id", 1, DataType::Integer}};
    EXPECT_EQ(code_of([&] { validate_mapping(m, fed.dictionary()); }), ErrorCode::InvalidArgument);
}

TEST(EtlMapping, OnlyIntegerWidensToReal) {
    ResultTable r{{{"x", DataType::Integer}, {"y", DataType::Text}}, {{Value{std::int64_t{3}}, Value{std::string("a")}}}};
    const ResultTable widened = apply_mapping(r, StarMapping{"t", "", {{"x", 0, DataType::Real}}});
    EXPECT_EQ(widened.rows[0][0], Value{3.0});
    EXPECT_EQ(code_of([&] { apply_mapping(r, StarMapping{"t", "", {{"y", 1, DataType::Integer}}}); }),
              ErrorCode::TypeMismatch);
}

TEST(EtlExtract, EmptySourceGivesEmptyStage) {
    Sources s(0, 1, "empty");
    const EtlJob job = parse_job(kJob);
    const ExtractResult ex = extract_transform(s.defs, job.mappings[0], s.stage_dir);
    EXPECT_EQ(ex.stage.row_count, 0u);
    EXPECT_EQ(ex.timing.rows, 0u);
    const FixtureTable back = read_stage(ex.stage.path);
    EXPECT_EQ(back.columns.size(), 4u);
    EXPECT_TRUE(back.rows.empty());
}

TEST(EtlExtract, UnwritableStageDirectory) {
    Sources s(3, 1, "unwritable");
    const fs::path blocker = fs::temp_directory_path() / "fedsql_not_a_dir";
    std::ofstream(blocker) << "x";
    EXPECT_EQ(code_of([&] { extract_transform(s.defs, parse_job(kJob).mappings[0], blocker / "sub"); }),
              ErrorCode::StageWriteFailed);
    fs::remove(blocker);
}

TEST(EtlJobRun, WarehouseAndMartsMatchTheReferenceStore) {
    Sources s(300, 7, "full");
    const EtlJob job = parse_job(kJob);
    const TargetStore mart = s.mart_target();
    const JobReport report = run_job(job, s.defs, s.wh_target(), "wh", &mart, {s.stage_dir});
    EXPECT_EQ(report.steps.size(), 2u * (1 + job.views.size()));

    const auto fact = s.warehouse->table("fact_events");
    ASSERT_TRUE(fact);
    EXPECT_EQ(sorted(fact->rows), sorted(s.oracle->query(job.mappings[0].source_query).rows));
    EXPECT_EQ(fact->rows.size(), 300u);

    // Views are checked against the same SQL run directly on the warehouse store.
    for (const auto& v : job.views) {
        const auto got = s.mart->table(v.name);
        ASSERT_TRUE(got) << v.name;
        EXPECT_EQ(sorted(got->rows), sorted(s.warehouse->query(v.query).rows)) << v.name;
    }
    EXPECT_EQ(s.mart->table("all_events")->columns[0].name, "event_id");
    const auto by_year = s.mart->table("by_year")->columns;
    EXPECT_EQ(by_year[0].name, "event_id");
    EXPECT_EQ(by_year[1].name, "year");
}

TEST(EtlJobRun, StagedEqualsDirect) {
    Sources staged(200, 3, "staged");
    Sources direct(200, 3, "direct");
    const EtlJob job = parse_job(kJob);
    const TargetStore m1 = staged.mart_target(), m2 = direct.mart_target();
    run_job(job, staged.defs, staged.wh_target(), "wh", &m1, {staged.stage_dir, false});
    run_job(job, direct.defs, direct.wh_target(), "wh", &m2, {direct.stage_dir, true});
    EXPECT_FALSE(fs::exists(direct.stage_dir / "fact_events.stage"));
    for (const auto& name : {"fact_events"}) {
        EXPECT_EQ(sorted(staged.warehouse->table(name)->rows), sorted(direct.warehouse->table(name)->rows));
    }
    for (const auto& v : job.views) {
        EXPECT_EQ(staged.mart->table(v.name)->columns, direct.mart->table(v.name)->columns);
        EXPECT_EQ(sorted(staged.mart->table(v.name)->rows), sorted(direct.mart->table(v.name)->rows));
    }
}

TEST(EtlLoad, AppendsOnEveryRun) {
    Sources s(50, 2, "twice");
    const StarMapping m = parse_job(kJob).mappings[0];
    const ExtractResult ex = extract_transform(s.defs, m, s.stage_dir);
    ensure_table(s.wh_target(), {"fact_events", read_stage(ex.stage.path).columns});
    EXPECT_EQ(load(ex.stage, s.wh_target(), "fact_events").rows, 50u);
    EXPECT_EQ(load(ex.stage, s.wh_target(), "fact_events").rows, 50u);
    EXPECT_EQ(s.warehouse->row_count("fact_events"), 100u);
}

TEST(EtlLoad, CorruptStageLoadsNothing) {
    Sources s(50, 2, "corrupt");
    const StarMapping m = parse_job(kJob).mappings[0];
    ExtractResult ex = extract_transform(s.defs, m, s.stage_dir);
    ensure_table(s.wh_target(), {"fact_events", read_stage(ex.stage.path).columns});
    {
        std::ofstream out(ex.stage.path, std::ios::app | std::ios::binary);
        out << "51,not_a_number,2004,\"x\"\n";
    }
    EXPECT_EQ(code_of([&] { load(ex.stage, s.wh_target(), "fact_events"); }), ErrorCode::MalformedStage);
    EXPECT_EQ(s.warehouse->row_count("fact_events"), 0u);

    ex = extract_transform(s.defs, m, s.stage_dir);
    EXPECT_EQ(code_of([&] { load(ex.stage, s.wh_target(), "missing_table"); }), ErrorCode::UnknownTable);
    s.warehouse->put_table({"narrow", {{"x", DataType::Integer}}, {}});
    EXPECT_EQ(code_of([&] { load(ex.stage, s.wh_target(), "narrow"); }), ErrorCode::MalformedStage);
    EXPECT_EQ(code_of([&] { load(StageFile{s.stage_dir / "nope.stage"}, s.wh_target(), "narrow"); }),
              ErrorCode::MalformedStage);
}

TEST(EtlLoad, UnreachableTarget) {
    Sources s(5, 2, "offline");
    const ExtractResult ex = extract_transform(s.defs, parse_job(kJob).mappings[0], s.stage_dir);
    s.driver->set_offline(s.wh_target().url, true);
    EXPECT_EQ(code_of([&] { load(ex.stage, s.wh_target(), "fact_events"); }), ErrorCode::BackendUnavailable);
}

TEST(EtlMart, ColumnNamesQualifyOnlyOnClash) {
    const auto cols = mart_columns({{"f.id", DataType::Integer}, {"g.id", DataType::Integer}, {"f.x", DataType::Real}});
    EXPECT_EQ(cols[0].name, "f_id");
    EXPECT_EQ(cols[1].name, "g_id");
    EXPECT_EQ(cols[2].name, "x");
}

TEST(EtlTimings, CsvLayout) {
    const std::string csv = timings_csv({{Phase::Extract, 1.5, 10, 200}, {Phase::Load, 0.25, 10, 200}});
    EXPECT_EQ(csv, "phase,rows,bytes,duration_ms\r\nextract,10,200,1.500\r\nload,10,200,0.250\r\n");
}
