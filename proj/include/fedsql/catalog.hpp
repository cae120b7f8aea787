// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedsql/value.hpp"

namespace fedsql {

class BackendAdapter;
using Handle = std::uint64_t;

struct ColumnSpec {
    std::string physical_name;
    std::string logical_name;
    DataType type = DataType::Text;
    bool nullable = true;

    bool operator==(const ColumnSpec&) const = default;
};

struct TableSpec {
    std::string physical_name;
    std::string logical_name;
    std::vector<ColumnSpec> columns;
    std::vector<std::string> key_columns;  ///< logical column names

    const ColumnSpec* find_column(std::string_view logical) const;
    bool operator==(const TableSpec&) const = default;
};

/// Foreign-key style link between two tables of one database, by logical
/// names. Stored and validated; the planner does not consult it.
struct RelationshipSpec {
    std::string from_table;
    std::vector<std::string> from_columns;
    std::string to_table;
    std::vector<std::string> to_columns;

    bool operator==(const RelationshipSpec&) const = default;
};

/// Lower-level catalog: one database's schema with logical aliases.
struct LowerSpec {
    std::string database_logical_name;
    std::vector<TableSpec> tables;
    std::vector<RelationshipSpec> relationships;

    const TableSpec* find_table(std::string_view logical) const;

    /// Throws MalformedSpec / DuplicateName / DanglingRelationship.
    void validate() const;

    bool operator==(const LowerSpec&) const = default;
};

struct UpperSpecEntry {
    std::string source_id;
    std::string url;
    std::string driver_name;
    std::string lower_spec_ref;

    bool operator==(const UpperSpecEntry&) const = default;
};

/// Upper-level catalog: the federation's list of sources. One per server.
struct UpperSpec {
    std::vector<UpperSpecEntry> entries;

    const UpperSpecEntry* find(std::string_view source_id) const;
    bool operator==(const UpperSpec&) const = default;
};

using LowerSpecMap = std::map<std::string, LowerSpec>;

struct TableBinding {
    std::string source_id;
    std::string physical_table;
    std::vector<std::string> columns;  ///< logical column names in spec order

    bool operator==(const TableBinding&) const = default;
};

struct ColumnBinding {
    std::string physical_column;
    DataType type = DataType::Text;

    bool operator==(const ColumnBinding&) const = default;
};

/// Merged logical namespace of all locally registered sources.
struct DataDictionary {
    std::map<std::string, TableBinding> tables;
    std::map<std::pair<std::string, std::string>, ColumnBinding> columns;

    const TableBinding* find_table(std::string_view logical) const;
    const ColumnBinding* find_column(const std::string& table, const std::string& column) const;

    bool operator==(const DataDictionary&) const = default;
};

struct Fingerprint {
    std::uint64_t byte_size = 0;
    std::string md5_hex;

    bool operator==(const Fingerprint&) const = default;
};

/// Counts which comparisons specs_changed actually performed.
struct FingerprintProbe {
    std::size_t size_comparisons = 0;
    std::size_t md5_comparisons = 0;
};

LowerSpec parse_lower_spec(std::string_view document);
std::string serialize_lower_spec(const LowerSpec& spec);

/// Maps a lower_spec_ref to the document bytes; nullopt when it cannot be found.
using SpecResolver = std::function<std::optional<std::string>(const std::string& ref)>;

std::pair<UpperSpec, LowerSpecMap> parse_upper_spec(std::string_view document, const SpecResolver& resolver);
std::string serialize_upper_spec(const UpperSpec& spec);

/// Lower spec describing every table the backend reports; logical names
/// default to physical names.
LowerSpec introspect(BackendAdapter& backend, Handle handle, const std::string& database_logical_name);

/// Regenerated spec with curated logical names carried over from `previous`
/// wherever the physical table/column still exists.
LowerSpec carry_logical_names(const LowerSpec& introspected, const LowerSpec& previous);

Fingerprint fingerprint(std::string_view bytes);

/// Size first; md5 only when the sizes agree.
bool specs_changed(const Fingerprint& old_fp, const Fingerprint& new_fp, FingerprintProbe* probe = nullptr);

/// Throws LogicalNameCollision when a logical table name appears in two sources
/// and UnresolvableRef when an entry has no lower spec.
DataDictionary build_dictionary(const UpperSpec& upper, const LowerSpecMap& lowers);

/// Non-empty and free of whitespace.
bool is_identifier(std::string_view name);

}  // namespace fedsql
