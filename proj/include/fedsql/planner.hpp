// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedsql/sql.hpp"

namespace fedsql {

/// Where a group of tables is evaluated: a local source or a peer server.
struct Target {
    enum class Kind { Local, Remote };

    Kind kind = Kind::Local;
    std::string id;  ///< source id or peer base URL

    static Target local(std::string source_id) { return {Kind::Local, std::move(source_id)}; }
    static Target remote(std::string url) { return {Kind::Remote, std::move(url)}; }

    bool is_local() const { return kind == Kind::Local; }
    /// `local:<id>` / `remote:<url>`; plans are ordered by this key.
    std::string key() const { return (is_local() ? "local:" : "remote:") + id; }

    bool operator==(const Target&) const = default;
    bool operator<(const Target& other) const { return key() < other.key(); }
};

/// Table indices (into BoundQuery::tables) per target.
using Partition = std::map<Target, std::vector<std::size_t>>;

/// Logical table -> hosting server URLs, sorted ascending.
using ReplicaLookup = std::function<std::vector<std::string>(const std::string& table)>;

/// Groups local tables by source and remote tables by the first URL the
/// lookup returns. Throws UnknownTable when a remote table has no replica.
Partition partition_tables(const BoundQuery& bq, const ReplicaLookup& lookup);

struct OutputColumn {
    std::string name;  ///< merged name `alias.logical`
    std::string field;  ///< select field as sent to the target
    std::optional<DataType> type;

    bool operator==(const OutputColumn&) const = default;
};

/// One fragment shipped to a single target.
struct SubQuery {
    Target target;
    std::vector<std::size_t> table_indices;
    std::vector<std::string> tables;  ///< `name` or `name alias`
    std::vector<OutputColumn> output;
    /// When set the target returns every column of its tables (remote star);
    /// `output` is then empty and names come back from the peer.
    bool select_all = false;
    std::vector<BoundPredicate> predicates;  ///< pushed down
    std::vector<std::string> where_terms;  ///< predicates rendered for the target

    std::vector<std::string> select_fields() const;
    std::string where_clause() const;
};

struct KeyPair {
    std::string left;  ///< column of the accumulated left side
    std::string right;  ///< column of the joined sub-query

    bool operator==(const KeyPair&) const = default;
};

/// Joins the running result (left-deep) with sub-query `right_input`.
struct JoinStep {
    std::size_t right_input = 0;
    std::vector<KeyPair> keys;
    std::vector<BoundPredicate> predicates;  ///< the equalities the keys came from
};

/// `column` empty: every column of `alias` in arrival order.
struct ProjectionItem {
    std::string alias;
    std::optional<std::string> column;

    bool operator==(const ProjectionItem&) const = default;
};

struct MergePlan {
    std::size_t first_input = 0;
    std::vector<JoinStep> join_steps;
    std::vector<BoundPredicate> residual_predicates;
    std::vector<ProjectionItem> projection;
};

struct PlannedOrder {
    std::string column;  ///< merged name
    bool descending = false;
};

struct QueryPlan {
    std::vector<SubQuery> subqueries;
    MergePlan merge;
    std::vector<PlannedOrder> order_by;
    std::optional<std::int64_t> limit;
    BoundQuery query;  ///< kept for names and types during merging
};

/// Throws CrossProductRejected when the cross-target join graph is disconnected.
QueryPlan plan(const BoundQuery& bq, const Partition& partition);

/// The fragment as one statement in the query grammar.
std::string render_subquery(const SubQuery& sq);

}  // namespace fedsql
