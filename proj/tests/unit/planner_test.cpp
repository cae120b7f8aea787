// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "fedsql/catalog.hpp"
#include "fedsql/error.hpp"
#include "fedsql/planner.hpp"
#include "fedsql/sql.hpp"

using namespace fedsql;

namespace {

// Two local sources: a(events, runs) and b(calib); `detectors` lives remotely.
DataDictionary two_source_dictionary() {
    LowerSpec a;
    a.database_logical_name = "a";
    a.tables.push_back({"EVT", "events",
                        {{"ID", "id", DataType::Integer, true}, {"RUN", "run_id", DataType::Integer, true},
                         {"E", "energy", DataType::Real, true}},
                        {}});
    a.tables.push_back({"RUNS", "runs", {{"ID", "id", DataType::Integer, true}, {"YR", "year", DataType::Integer, true}}, {}});
    LowerSpec b;
    b.database_logical_name = "b";
    b.tables.push_back({"calib", "calib", {{"run", "run", DataType::Integer, true}, {"gain", "gain", DataType::Real, true}}, {}});
    UpperSpec u;
    u.entries = {{"a", "mem:a", "reference", "i"}, {"b", "mem:b", "reference", "i"}};
    return build_dictionary(u, {{"a", a}, {"b", b}});
}

ReplicaLookup fixed_lookup(std::map<std::string, std::vector<std::string>> m) {
    return [m](const std::string& t) {
        auto it = m.find(t);
        return it == m.end() ? std::vector<std::string>{} : it->second;
    };
}

QueryPlan plan_for(const std::string& sql, const ReplicaLookup& lookup = {}) {
    const BoundQuery bq = resolve_names(parse_sql(sql), two_source_dictionary());
    return plan(bq, partition_tables(bq, lookup));
}

}  // namespace

TEST(Partition, GroupsBySourceAndPicksSmallestReplica) {
    const BoundQuery bq = resolve_names(
        parse_sql("SELECT * FROM events, runs, calib, detectors WHERE events.run_id = runs.id AND "
                  "runs.id = calib.run AND calib.run = detectors.run"),
        two_source_dictionary());
    const Partition p =
        partition_tables(bq, fixed_lookup({{"detectors", {"http://z:1", "http://b:2", "http://m:3"}}}));
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p.at(Target::local("a")), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(p.at(Target::local("b")), (std::vector<std::size_t>{2}));
    EXPECT_EQ(p.at(Target::remote("http://b:2")), (std::vector<std::size_t>{3}));
}

TEST(Partition, ReplicaChoiceIgnoresPublishOrder) {
    const BoundQuery bq = resolve_names(parse_sql("SELECT * FROM detectors"), two_source_dictionary());
    std::vector<std::string> urls{"http://c:1", "http://a:9", "http://b:5"};
    std::sort(urls.begin(), urls.end());
    do {
        const Partition p = partition_tables(bq, fixed_lookup({{"detectors", urls}}));
        EXPECT_EQ(p.begin()->first, Target::remote("http://a:9"));
    } while (std::next_permutation(urls.begin(), urls.end()));
}

TEST(Partition, UnpublishedRemoteTableIsUnknown) {
    const BoundQuery bq = resolve_names(parse_sql("SELECT * FROM nowhere"), two_source_dictionary());
    try {
        partition_tables(bq, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownTable);
    }
}

TEST(Plan, SameSourceJoinIsOneSubqueryWithPushdown) {
    const QueryPlan qp = plan_for("SELECT e.energy FROM events e, runs r WHERE e.run_id = r.id AND r.year > 2003");
    ASSERT_EQ(qp.subqueries.size(), 1u);
    const SubQuery& sq = qp.subqueries[0];
    EXPECT_EQ(sq.tables, (std::vector<std::string>{"EVT e", "RUNS r"}));
    EXPECT_EQ(sq.where_clause(), "e.RUN = r.ID AND r.YR > 2003");
    EXPECT_TRUE(qp.merge.join_steps.empty());
    EXPECT_TRUE(qp.merge.residual_predicates.empty());
    EXPECT_EQ(render_subquery(sq), "SELECT e.E FROM EVT e, RUNS r WHERE e.RUN = r.ID AND r.YR > 2003");
}

TEST(Plan, CrossSourceEqualityBecomesJoinKey) {
    const QueryPlan qp =
        plan_for("SELECT events.id, calib.gain FROM events, calib WHERE events.run_id = calib.run AND calib.gain > 0.5");
    ASSERT_EQ(qp.subqueries.size(), 2u);
    EXPECT_EQ(qp.subqueries[0].target, Target::local("a"));
    EXPECT_EQ(qp.subqueries[1].target, Target::local("b"));
    EXPECT_EQ(qp.subqueries[1].where_clause(), "calib.gain > 0.5");
    ASSERT_EQ(qp.merge.join_steps.size(), 1u);
    ASSERT_EQ(qp.merge.join_steps[0].keys.size(), 1u);
    EXPECT_EQ(qp.merge.join_steps[0].keys[0], (KeyPair{"events.run_id", "calib.run"}));
    // the join column is fetched even though it is not selected
    std::vector<std::string> names;
    for (const auto& o : qp.subqueries[0].output) names.push_back(o.name);
    EXPECT_NE(std::find(names.begin(), names.end(), "events.run_id"), names.end());
}

TEST(Plan, CrossSourceInequalityIsResidual) {
    const QueryPlan qp = plan_for(
        "SELECT events.id FROM events, calib WHERE events.run_id = calib.run AND events.energy < calib.gain");
    ASSERT_EQ(qp.merge.residual_predicates.size(), 1u);
    EXPECT_EQ(qp.merge.residual_predicates[0].op, CompareOp::Lt);
}

TEST(Plan, DisconnectedTablesAreRejected) {
    for (const char* sql : {"SELECT * FROM events, calib", "SELECT * FROM events, runs",
                            "SELECT * FROM events, calib WHERE events.energy < calib.gain"}) {
        try {
            plan_for(sql);
            FAIL() << sql;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::CrossProductRejected) << sql;
        }
    }
}

TEST(Plan, RemoteFragmentUsesLogicalNames) {
    const QueryPlan qp = plan_for("SELECT d.name FROM events, detectors d WHERE events.id = d.event AND d.ok = 1",
                                  fixed_lookup({{"detectors", {"http://peer:1"}}}));
    ASSERT_EQ(qp.subqueries.size(), 2u);
    const SubQuery& remote = qp.subqueries[1];
    EXPECT_EQ(remote.target, Target::remote("http://peer:1"));
    EXPECT_EQ(render_subquery(remote), "SELECT d.name, d.event FROM detectors d WHERE d.ok = 1");
}

TEST(Plan, RemoteStarAsksForEverything) {
    const QueryPlan qp = plan_for("SELECT * FROM detectors", fixed_lookup({{"detectors", {"http://peer:1"}}}));
    ASSERT_EQ(qp.subqueries.size(), 1u);
    EXPECT_TRUE(qp.subqueries[0].select_all);
    EXPECT_EQ(render_subquery(qp.subqueries[0]), "SELECT * FROM detectors");
}

TEST(Plan, CycleOfEqualitiesBecomesMultiKeyJoin) {
    const QueryPlan qp = plan_for(
        "SELECT events.id FROM events, calib, detectors WHERE events.run_id = calib.run AND "
        "calib.run = detectors.run AND detectors.event = events.id",
        fixed_lookup({{"detectors", {"http://peer:1"}}}));
    ASSERT_EQ(qp.merge.join_steps.size(), 2u);
    EXPECT_EQ(qp.merge.join_steps[0].keys.size() + qp.merge.join_steps[1].keys.size(), 3u);
    EXPECT_TRUE(qp.merge.residual_predicates.empty());
}

TEST(Plan, OrderAndLimitSurviveToMerge) {
    const QueryPlan qp = plan_for("SELECT events.id FROM events, calib WHERE events.run_id = calib.run "
                                  "ORDER BY calib.gain DESC LIMIT 4");
    ASSERT_EQ(qp.order_by.size(), 1u);
    EXPECT_EQ(qp.order_by[0].column, "calib.gain");
    EXPECT_TRUE(qp.order_by[0].descending);
    EXPECT_EQ(qp.limit, 4);
}
