// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedsql/value.hpp"

namespace fedsql {

struct Column {
    std::string name;
    DataType type = DataType::Text;

    bool operator==(const Column&) const = default;
};

using Row = std::vector<Value>;

/// Column-typed two-dimensional grid; the currency passed between backends,
/// the merge phase, peers and clients.
struct ResultTable {
    std::vector<Column> columns;
    std::vector<Row> rows;

    std::size_t width() const { return columns.size(); }
    std::size_t cell_count() const { return columns.size() * rows.size(); }
    std::optional<std::size_t> column_index(std::string_view name) const;

    /// Throws Error(Internal) when a row has the wrong arity or a cell does
    /// not fit its column type.
    void validate() const;

    bool operator==(const ResultTable&) const = default;
};

/// Lexicographic over cells using canonical_compare.
bool canonical_row_less(const Row& a, const Row& b);

void sort_canonical(ResultTable& table);

/// Orders `rows` by `keys` (parallel to rows; descending flags per key
/// position), breaking ties canonically on the rows themselves.
void sort_by_keys(std::vector<Row>& rows, std::vector<Row>& keys, const std::vector<bool>& descending);

/// RFC-4180 CSV with a header row of column names.
std::string to_csv(const ResultTable& table);

/// Quotes a CSV field when it contains a delimiter, quote or line break.
std::string csv_field(std::string_view text);

}  // namespace fedsql
