// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fedsql/catalog.hpp"
#include "fedsql/value.hpp"

namespace fedsql {

// Supported subset:
//   query := SELECT items FROM tables [WHERE pred (AND pred)*]
//            [ORDER BY ord (, ord)*] [LIMIT int]
//   items := * | item (, item)*      item  := [ident .] ident
//   tables := table (, table)*       table := ident [ident]
//   pred  := colref op (colref | literal)
// Keywords are case-insensitive, identifiers case-sensitive.

struct ColumnRef {
    std::optional<std::string> qualifier;
    std::string column;

    bool operator==(const ColumnRef&) const = default;
};

struct Literal {
    DataType kind = DataType::Integer;
    Value value;

    bool operator==(const Literal&) const = default;
};

using Operand = std::variant<ColumnRef, Literal>;

struct Predicate {
    ColumnRef left;
    CompareOp op = CompareOp::Eq;
    Operand right;

    bool operator==(const Predicate&) const = default;
};

struct TableRef {
    std::string name;
    std::optional<std::string> alias;

    const std::string& effective_name() const { return alias ? *alias : name; }
    bool operator==(const TableRef&) const = default;
};

struct OrderItem {
    ColumnRef column;
    bool descending = false;

    bool operator==(const OrderItem&) const = default;
};

struct QueryAst {
    bool select_star = false;
    std::vector<ColumnRef> select_items;
    std::vector<TableRef> from_tables;
    std::vector<Predicate> where;
    std::vector<OrderItem> order_by;
    std::optional<std::int64_t> limit;

    bool operator==(const QueryAst&) const = default;
};

/// Throws SyntaxError (with a 1-based offset) or UnsupportedFeature.
QueryAst parse_sql(std::string_view text);

/// Canonical text; parse_sql(render_sql(ast)) == ast.
std::string render_sql(const QueryAst& ast);

std::string render_literal(const Literal& literal);
std::string render_column(const ColumnRef& ref);

// ---------------------------------------------------------------------------
// Name resolution

struct BoundColumnInfo {
    std::string logical;
    std::string physical;
    DataType type = DataType::Text;

    bool operator==(const BoundColumnInfo&) const = default;
};

/// A FROM entry after lookup in the dictionary. Remote tables carry only
/// their logical name; the server hosting them is found later.
struct BoundTable {
    std::string logical_name;
    std::string alias;  ///< effective name used to qualify columns
    bool local = false;
    std::string source_id;
    std::string physical_name;
    std::vector<BoundColumnInfo> columns;  ///< local tables only, spec order

    bool operator==(const BoundTable&) const = default;
};

struct BoundColumn {
    std::size_t table = 0;  ///< index into BoundQuery::tables
    std::string logical;
    std::string physical;
    std::optional<DataType> type;  ///< unknown for remote tables

    bool operator==(const BoundColumn&) const = default;
};

using BoundOperand = std::variant<BoundColumn, Literal>;

struct BoundPredicate {
    BoundColumn left;
    CompareOp op = CompareOp::Eq;
    BoundOperand right;

    bool operator==(const BoundPredicate&) const = default;
};

struct BoundOrder {
    BoundColumn column;
    bool descending = false;

    bool operator==(const BoundOrder&) const = default;
};

struct BoundQuery {
    bool select_star = false;
    std::vector<BoundColumn> select;
    std::vector<BoundTable> tables;
    std::vector<BoundPredicate> where;
    std::vector<BoundOrder> order_by;
    std::optional<std::int64_t> limit;

    bool has_remote() const;
    bool operator==(const BoundQuery&) const = default;
};

/// Binds every table and column. Tables missing from the dictionary become
/// remote. Throws UnknownColumn, UnknownTable (bad qualifier), TypeMismatch,
/// AmbiguousColumn.
BoundQuery resolve_names(const QueryAst& ast, const DataDictionary& dict);

/// `alias.logical`: the name a bound column carries through the merge phase.
std::string merged_name(const BoundQuery& bq, const BoundColumn& col);

}  // namespace fedsql
