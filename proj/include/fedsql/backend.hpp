// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedsql/result_table.hpp"

namespace fedsql {

using Handle = std::uint64_t;

/// Physical table description reported by a backend.
struct TableSchema {
    std::string name;
    std::vector<Column> columns;

    bool operator==(const TableSchema&) const = default;
};

/// Wrapper contract every relational store is reached through: open a handle
/// for a database, then run select-fields / tables / where requests against
/// it. One adapter instance serves many databases of the same driver family.
///
/// Implementations must tolerate concurrent calls on distinct handles.
class BackendAdapter {
public:
    virtual ~BackendAdapter() = default;

    virtual std::string driver_name() const = 0;

    /// Connects and registers the handle. Throws BackendUnavailable.
    virtual Handle open(const std::string& connection, const std::string& username,
                        const std::string& password) = 0;

    /// Read-only. `select_fields` are `alias.column` or `*`; `tables` are
    /// `name` or `name alias`; `where_clause` is an AND-conjunction or empty.
    virtual ResultTable execute(Handle handle, std::span<const std::string> select_fields,
                                std::span<const std::string> tables, const std::string& where_clause) = 0;

    /// Every table the database reports, in a stable order.
    virtual std::vector<TableSchema> describe(Handle handle) = 0;

    virtual void close(Handle handle) = 0;

    // Write path used only by the ETL loader.
    virtual void create_table(Handle handle, const TableSchema& schema);
    virtual void append_rows(Handle handle, const std::string& table, const std::vector<Row>& rows);
};

/// Renders the three execute() arguments as one statement in the supported grammar.
std::string compose_select(std::span<const std::string> select_fields, std::span<const std::string> tables,
                           const std::string& where_clause);

struct FixtureTable {
    std::string name;
    std::vector<Column> columns;
    std::vector<Row> rows;

    bool operator==(const FixtureTable&) const = default;
};

/// Table-fixture text: `#table <name>`, a names line, a types line, then
/// comma-separated values (empty = null, text double-quoted). Tables are
/// separated by a blank line. Throws MalformedFixture.
std::vector<FixtureTable> parse_fixture(std::string_view text);
std::string write_fixture(std::span<const FixtureTable> tables);
std::string write_fixture_rows(const std::vector<Column>& columns, std::span<const Row> rows);

/// In-memory relational store that evaluates the full query grammar with a
/// straightforward nested-loop evaluator. Single-source answers from it are
/// the reference semantics the federated path is checked against.
class ReferenceBackend {
public:
    ReferenceBackend() = default;
    explicit ReferenceBackend(std::vector<FixtureTable> tables);

    std::vector<TableSchema> describe() const;
    std::optional<FixtureTable> table(std::string_view name) const;
    std::vector<FixtureTable> tables() const;
    std::size_t row_count(std::string_view name) const;

    void create_table(const TableSchema& schema);
    void put_table(FixtureTable table);
    void drop_table(std::string_view name);
    void rename_table(std::string_view from, std::string to);
    /// Existing rows get null in the new column.
    void add_column(std::string_view table, Column column);
    /// All-or-nothing; throws TypeMismatch or InvalidArgument before touching the table.
    void append_rows(std::string_view table, const std::vector<Row>& rows);

    ResultTable query(std::string_view sql) const;

    std::string to_fixture() const;

private:
    FixtureTable* find(std::string_view name);
    const FixtureTable* find(std::string_view name) const;

    mutable std::shared_mutex mu_;
    std::vector<FixtureTable> tables_;
};

std::shared_ptr<ReferenceBackend> load_reference_backend(std::string_view fixture_text);
std::shared_ptr<ReferenceBackend> load_reference_backend_file(const std::filesystem::path& path);

/// BackendAdapter over ReferenceBackend stores. Connection strings:
///   `mem:<name>`  a store attached in-process with attach()
///   `file:<path>` a fixture file, re-read when it changes on disk and
///                 written back after loads
class ReferenceDriver : public BackendAdapter {
public:
    static constexpr std::string_view kDriverName = "reference";

    std::string driver_name() const override { return std::string(kDriverName); }

    void attach(const std::string& name, std::shared_ptr<ReferenceBackend> store);
    void detach(const std::string& name);
    /// Marks a connection string unreachable: open and execute then fail.
    void set_offline(const std::string& connection, bool offline);

    Handle open(const std::string& connection, const std::string& username, const std::string& password) override;
    ResultTable execute(Handle handle, std::span<const std::string> select_fields,
                        std::span<const std::string> tables, const std::string& where_clause) override;
    std::vector<TableSchema> describe(Handle handle) override;
    void close(Handle handle) override;
    void create_table(Handle handle, const TableSchema& schema) override;
    void append_rows(Handle handle, const std::string& table, const std::vector<Row>& rows) override;

    std::size_t open_handle_count() const;

private:
    struct FileState {
        std::filesystem::file_time_type mtime{};
        std::uintmax_t size = 0;
    };
    struct Session {
        std::string connection;
        std::shared_ptr<ReferenceBackend> store;
    };

    std::shared_ptr<ReferenceBackend> resolve(const std::string& connection);
    std::shared_ptr<ReferenceBackend> session_store(Handle handle);
    void persist(Handle handle);

    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<ReferenceBackend>> attached_;
    std::map<std::string, FileState> files_;
    std::map<std::string, bool> offline_;
    std::map<Handle, Session> sessions_;
    Handle next_handle_ = 1;
};

/// driver_name -> adapter.
class DriverRegistry {
public:
    void add(std::shared_ptr<BackendAdapter> adapter);
    std::shared_ptr<BackendAdapter> find(std::string_view driver_name) const;

private:
    std::map<std::string, std::shared_ptr<BackendAdapter>, std::less<>> drivers_;
};

}  // namespace fedsql
