// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/result_table.hpp"

#include <algorithm>

#include "fedsql/error.hpp"

namespace fedsql {

std::optional<std::size_t> ResultTable::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return i;
    }
    return std::nullopt;
}

void ResultTable::validate() const {
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != columns.size()) {
            throw Error(ErrorCode::Internal, "row " + std::to_string(r) + " has " +
                                                 std::to_string(rows[r].size()) + " cells, expected " +
                                                 std::to_string(columns.size()));
        }
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (!value_fits(rows[r][c], columns[c].type)) {
                throw Error(ErrorCode::Internal, "cell (" + std::to_string(r) + "," + std::to_string(c) +
                                                     ") does not fit column " + columns[c].name);
            }
        }
    }
}

bool canonical_row_less(const Row& a, const Row& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = canonical_compare(a[i], b[i]);
        if (c != 0) return c < 0;
    }
    return a.size() < b.size();
}

void sort_canonical(ResultTable& table) {
    std::stable_sort(table.rows.begin(), table.rows.end(), canonical_row_less);
}

void sort_by_keys(std::vector<Row>& rows, std::vector<Row>& keys, const std::vector<bool>& descending) {
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (std::size_t k = 0; k < descending.size(); ++k) {
            auto c = canonical_compare(keys[a][k], keys[b][k]);
            if (c != 0) return descending[k] ? c > 0 : c < 0;
        }
        return canonical_row_less(rows[a], rows[b]);
    });
    std::vector<Row> sorted_rows, sorted_keys;
    sorted_rows.reserve(rows.size());
    sorted_keys.reserve(rows.size());
    for (auto i : order) {
        sorted_rows.push_back(std::move(rows[i]));
        sorted_keys.push_back(std::move(keys[i]));
    }
    rows = std::move(sorted_rows);
    keys = std::move(sorted_keys);
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string to_csv(const ResultTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += csv_field(table.columns[c].name);
    }
    out += "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            if (!is_null(row[c])) out += csv_field(value_to_text(row[c]));
        }
        out += "\r\n";
    }
    return out;
}

}  // namespace fedsql
