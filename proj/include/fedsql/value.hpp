// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace fedsql {

/// Column types understood by the middleware. Backend-native types are mapped
/// onto these at the adapter boundary.
enum class DataType { Integer, Real, Text, Timestamp };

std::string_view data_type_name(DataType type);
std::optional<DataType> data_type_from_name(std::string_view name);

/// Seconds since the Unix epoch, UTC.
struct Timestamp {
    std::int64_t seconds = 0;
    auto operator<=>(const Timestamp&) const = default;
};

/// ISO-8601 `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp ts);
/// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SS` and the same with a trailing `Z`.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// One cell. `std::monostate` is SQL null.
using Value = std::variant<std::monostate, std::int64_t, double, std::string, Timestamp>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// True if `v` is null or its kind fits a column of `type`. Integers fit real columns.
bool value_fits(const Value& v, DataType type);

/// Whether two column types may be compared (numeric kinds mix).
bool types_comparable(DataType a, DataType b);

/// Three-way comparison with SQL semantics: nullopt if either side is null or
/// the kinds are incomparable.
std::optional<std::strong_ordering> compare_values(const Value& a, const Value& b);

/// Total order used for canonical row sorting: numbers, then text, then
/// timestamps, with nulls last.
std::strong_ordering canonical_compare(const Value& a, const Value& b);

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view op_symbol(CompareOp op);
/// Comparisons involving null (or incomparable kinds) are false.
bool evaluate(CompareOp op, const Value& a, const Value& b);

/// Shortest text that parses back to the same double.
std::string format_real(double v);

/// Text form used in fixtures, SQL and CSV (text is returned unquoted).
std::string value_to_text(const Value& v);

/// Parses the unquoted text form of a non-null cell.
std::optional<Value> parse_value(std::string_view text, DataType type);

}  // namespace fedsql
