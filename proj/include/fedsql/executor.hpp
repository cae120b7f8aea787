// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fedsql/backend.hpp"
#include "fedsql/planner.hpp"
#include "fedsql/result_table.hpp"

namespace fedsql {

/// Sends a rendered fragment to a peer federation server with forwarding
/// disabled and returns its decoded result.
class PeerClient {
public:
    virtual ~PeerClient() = default;
    virtual ResultTable query(const std::string& base_url, const std::string& sql) = 0;
};

struct SourceConnection {
    BackendAdapter* adapter = nullptr;
    Handle handle = 0;
};

using SourceConnections = std::map<std::string, SourceConnection>;

struct ExecutionOptions {
    std::size_t max_cells = 1'000'000;
    bool concurrent = true;
};

/// Runs every sub-query (concurrently when allowed), then joins, filters,
/// orders and projects. Any failing target fails the whole query.
ResultTable execute_plan(const QueryPlan& plan, const SourceConnections& sources, PeerClient* peers,
                         const ExecutionOptions& options = {});

using KeyIndexPairs = std::vector<std::pair<std::size_t, std::size_t>>;

/// Output columns are left ++ right. Null keys never match. Throws
/// TypeMismatch for incomparable key columns and ResultTooLarge past `max_cells`.
ResultTable hash_equi_join(const ResultTable& left, const ResultTable& right, const KeyIndexPairs& keys,
                           std::size_t max_cells = std::numeric_limits<std::size_t>::max());

/// Column-index form of a predicate, evaluated per row.
struct RowPredicate {
    std::size_t left = 0;
    CompareOp op = CompareOp::Eq;
    std::variant<std::size_t, Value> right;
};

ResultTable apply_residual(const ResultTable& table, std::span<const RowPredicate> predicates);

/// Throws UnknownColumn.
ResultTable project(const ResultTable& table, std::span<const std::string> columns);

}  // namespace fedsql
