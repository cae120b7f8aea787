// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "fedsql/catalog.hpp"
#include "fedsql/error.hpp"
#include "fedsql/sql.hpp"

using namespace fedsql;

namespace {

Error error_of(std::string_view sql) {
    try {
        parse_sql(sql);
    } catch (const Error& e) {
        return e;
    }
    ADD_FAILURE() << "parsed: " << sql;
    return Error(ErrorCode::Internal, "");
}

ColumnRef col(std::string q, std::string c) { return ColumnRef{std::move(q), std::move(c)}; }

}  // namespace

TEST(Parse, MinimalQuery) {
    const QueryAst ast = parse_sql("SELECT e.run FROM events e");
    EXPECT_FALSE(ast.select_star);
    ASSERT_EQ(ast.select_items.size(), 1u);
    EXPECT_EQ(ast.select_items[0], col("e", "run"));
    ASSERT_EQ(ast.from_tables.size(), 1u);
    EXPECT_EQ(ast.from_tables[0], (TableRef{"events", "e"}));
    EXPECT_TRUE(ast.where.empty());
}

TEST(Parse, StarJoinWithTwoPredicatesFieldByField) {
    QueryAst expected;
    expected.select_star = true;
    expected.from_tables = {{"events", std::nullopt}, {"runs", std::nullopt}};
    expected.where.push_back({col("events", "run_id"), CompareOp::Eq, col("runs", "id")});
    expected.where.push_back({col("runs", "year"), CompareOp::Gt, Literal{DataType::Integer, Value{std::int64_t{2003}}}});
    EXPECT_EQ(parse_sql("SELECT * FROM events, runs WHERE events.run_id = runs.id AND runs.year > 2003"), expected);
}

TEST(Parse, KeywordsAreCaseInsensitiveIdentifiersAreNot) {
    const QueryAst a = parse_sql("select X from T where X >= 1.5 order by X desc limit 3;");
    EXPECT_EQ(a.select_items[0], (ColumnRef{std::nullopt, "X"}));
    EXPECT_EQ(a.where[0].right, (Operand{Literal{DataType::Real, Value{1.5}}}));
    ASSERT_EQ(a.order_by.size(), 1u);
    EXPECT_TRUE(a.order_by[0].descending);
    EXPECT_EQ(a.limit, 3);
    EXPECT_NE(parse_sql("SELECT x FROM t").select_items[0], a.select_items[0]);
}

TEST(Parse, StringLiteralsUseDoubledQuotes) {
    const QueryAst a = parse_sql("SELECT a FROM t WHERE a = 'it''s'");
    EXPECT_EQ(a.where[0].right, (Operand{Literal{DataType::Text, Value{std::string("it's")}}}));
}

TEST(Parse, OutOfSubsetConstructsAreUnsupported) {
    for (const char* sql : {"SELECT count(*) FROM events", "SELECT a FROM t WHERE a = 1 OR a = 2",
                            "SELECT a FROM t GROUP BY a", "SELECT a FROM t WHERE NOT a = 1",
                            "SELECT a FROM t WHERE a IN (SELECT b FROM u)", "SELECT DISTINCT a FROM t",
                            "SELECT a FROM t JOIN u", "DELETE FROM t"}) {
        EXPECT_EQ(error_of(sql).code(), ErrorCode::UnsupportedFeature) << sql;
    }
}

TEST(Parse, SyntaxErrorsCarryOneBasedOffset) {
    Error e = error_of("SELECT FROM t");
    EXPECT_EQ(e.code(), ErrorCode::SyntaxError);
    EXPECT_EQ(e.offset(), 8u);
    e = error_of("SELECT a FROM t WHERE a = ");
    EXPECT_EQ(e.code(), ErrorCode::SyntaxError);
    EXPECT_EQ(error_of("SELECT a FROM t LIMIT 0").code(), ErrorCode::SyntaxError);
    EXPECT_EQ(error_of("SELECT a FROM t x, u x").code(), ErrorCode::SyntaxError);
    EXPECT_EQ(error_of("SELECT a FROM t WHERE a <> 1").code(), ErrorCode::SyntaxError);
    EXPECT_EQ(error_of("SELECT a FROM").code(), ErrorCode::SyntaxError);
    EXPECT_EQ(error_of("SELECT a FROM t WHERE a = 'open").code(), ErrorCode::SyntaxError);
    EXPECT_EQ(error_of("").code(), ErrorCode::SyntaxError);
}

// render followed by parse is the identity on ASTs
TEST(Parse, RenderParseFixpoint) {
    std::mt19937_64 rng(5);
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    const std::vector<std::string> names{"a", "b", "events", "Run_T", "x1"};
    for (int iter = 0; iter < 500; ++iter) {
        QueryAst ast;
        const int nt = 1 + pick(3);
        for (int t = 0; t < nt; ++t) {
            TableRef ref{names[pick(5)] + std::to_string(t), std::nullopt};
            if (pick(2)) ref.alias = "al" + std::to_string(t);
            ast.from_tables.push_back(ref);
        }
        auto random_col = [&] {
            ColumnRef c{std::nullopt, names[pick(5)]};
            if (pick(2)) c.qualifier = ast.from_tables[pick(nt)].effective_name();
            return c;
        };
        ast.select_star = pick(4) == 0;
        if (!ast.select_star) {
            for (int i = 0, n = 1 + pick(4); i < n; ++i) ast.select_items.push_back(random_col());
        }
        for (int i = 0, n = pick(4); i < n; ++i) {
            Predicate p{random_col(), static_cast<CompareOp>(pick(6)), random_col()};
            switch (pick(5)) {
                case 0: p.right = Literal{DataType::Integer, Value{static_cast<std::int64_t>(rng() % 100000) - 50000}}; break;
                case 1: p.right = Literal{DataType::Real, Value{static_cast<double>(rng() % 1000) / 8.0 - 30}}; break;
                case 2: p.right = Literal{DataType::Text, Value{std::string(pick(2) ? "o'k" : "a b,c")}}; break;
                default: break;
            }
            ast.where.push_back(p);
        }
        for (int i = 0, n = pick(3); i < n; ++i) ast.order_by.push_back({random_col(), pick(2) == 0});
        if (pick(2)) ast.limit = 1 + pick(1000);
        const std::string sql = render_sql(ast);
        EXPECT_EQ(parse_sql(sql), ast) << sql;
    }
}

namespace {

DataDictionary physics_dictionary() {
    LowerSpec s;
    s.database_logical_name = "physics";
    s.tables.push_back({"EVT_T", "events",
                        {{"EVT_ID", "event_id", DataType::Integer, true},
                         {"RUN", "run_id", DataType::Integer, true},
                         {"T0", "taken", DataType::Timestamp, true}},
                        {}});
    s.tables.push_back({"RUN_T", "runs",
                        {{"ID", "id", DataType::Integer, true}, {"YR", "year", DataType::Integer, true},
                         {"NAME", "name", DataType::Text, true}},
                        {}});
    UpperSpec u;
    u.entries.push_back({"physics", "mem:p", "reference", "inline"});
    return build_dictionary(u, {{"physics", s}});
}

ErrorCode resolve_error(std::string_view sql) {
    try {
        resolve_names(parse_sql(sql), physics_dictionary());
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "resolved: " << sql;
    return ErrorCode::Internal;
}

}  // namespace

TEST(Resolve, LocalTablesGetPhysicalNames) {
    const BoundQuery bq = resolve_names(parse_sql("SELECT e.run_id FROM events e WHERE e.event_id > 3"),
                                        physics_dictionary());
    ASSERT_EQ(bq.tables.size(), 1u);
    EXPECT_TRUE(bq.tables[0].local);
    EXPECT_EQ(bq.tables[0].source_id, "physics");
    EXPECT_EQ(bq.tables[0].physical_name, "EVT_T");
    EXPECT_EQ(bq.select[0].physical, "RUN");
    EXPECT_EQ(bq.select[0].type, DataType::Integer);
    EXPECT_EQ(bq.where[0].left.physical, "EVT_ID");
    EXPECT_EQ(merged_name(bq, bq.select[0]), "e.run_id");
}

TEST(Resolve, UnknownTablesBecomeRemote) {
    const BoundQuery bq = resolve_names(parse_sql("SELECT calib.gain FROM events, calib WHERE events.run_id = calib.run"),
                                        physics_dictionary());
    EXPECT_TRUE(bq.tables[0].local);
    EXPECT_FALSE(bq.tables[1].local);
    EXPECT_FALSE(bq.select[0].type);
    EXPECT_TRUE(bq.has_remote());
}

TEST(Resolve, Errors) {
    EXPECT_EQ(resolve_error("SELECT nope FROM events"), ErrorCode::UnknownColumn);
    EXPECT_EQ(resolve_error("SELECT e.nope FROM events e"), ErrorCode::UnknownColumn);
    EXPECT_EQ(resolve_error("SELECT x.id FROM events"), ErrorCode::UnknownTable);
    EXPECT_EQ(resolve_error("SELECT events.id FROM events e"), ErrorCode::UnknownTable);
    EXPECT_EQ(resolve_error("SELECT run_id FROM events WHERE run_id = 'abc'"), ErrorCode::TypeMismatch);
    EXPECT_EQ(resolve_error("SELECT name FROM runs WHERE name = 3"), ErrorCode::TypeMismatch);
    EXPECT_EQ(resolve_error("SELECT taken FROM events WHERE taken > 'not a date'"), ErrorCode::TypeMismatch);
    EXPECT_EQ(resolve_error("SELECT id FROM runs a, runs b"), ErrorCode::AmbiguousColumn);
    EXPECT_EQ(resolve_error("SELECT gain FROM calib1, calib2"), ErrorCode::AmbiguousColumn);
    EXPECT_EQ(resolve_error("SELECT e.run_id FROM events e, runs r WHERE e.run_id = r.name"), ErrorCode::TypeMismatch);
}

TEST(Resolve, UnqualifiedColumnsPreferTheUniqueLocalOwner) {
    const BoundQuery bq = resolve_names(parse_sql("SELECT year, gain FROM runs, calib"), physics_dictionary());
    EXPECT_EQ(bq.select[0].table, 0u);
    EXPECT_EQ(bq.select[1].table, 1u);
}

TEST(Resolve, TimestampLiteralsAreCoerced) {
    const BoundQuery bq =
        resolve_names(parse_sql("SELECT event_id FROM events WHERE taken >= '2004-01-01'"), physics_dictionary());
    const auto& lit = std::get<Literal>(bq.where[0].right);
    EXPECT_EQ(lit.kind, DataType::Timestamp);
    EXPECT_EQ(lit.value, Value{Timestamp{1072915200}});
}

TEST(Resolve, AddingTablesNeverRebindsLocalOnes) {
    const QueryAst ast = parse_sql("SELECT events.event_id FROM events, calib WHERE events.run_id = calib.run");
    const BoundQuery before = resolve_names(ast, physics_dictionary());
    DataDictionary bigger = physics_dictionary();
    bigger.tables["calib"] = TableBinding{"other", "CAL", {"run"}};
    bigger.columns[{"calib", "run"}] = ColumnBinding{"RUN_NO", DataType::Integer};
    const BoundQuery after = resolve_names(ast, bigger);
    EXPECT_EQ(before.tables[0], after.tables[0]);
    EXPECT_TRUE(after.tables[1].local);
}
