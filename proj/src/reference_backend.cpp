// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "fedsql/backend.hpp"
#include "fedsql/error.hpp"
#include "fedsql/sql.hpp"

namespace fedsql {

ReferenceBackend::ReferenceBackend(std::vector<FixtureTable> tables) : tables_(std::move(tables)) {
    for (const auto& t : tables_) {
        ResultTable check{t.columns, t.rows};
        check.validate();
    }
}

FixtureTable* ReferenceBackend::find(std::string_view name) {
    for (auto& t : tables_) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

const FixtureTable* ReferenceBackend::find(std::string_view name) const {
    for (const auto& t : tables_) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::vector<TableSchema> ReferenceBackend::describe() const {
    std::shared_lock lock(mu_);
    std::vector<TableSchema> out;
    out.reserve(tables_.size());
    for (const auto& t : tables_) out.push_back({t.name, t.columns});
    return out;
}

std::optional<FixtureTable> ReferenceBackend::table(std::string_view name) const {
    std::shared_lock lock(mu_);
    if (const auto* t = find(name)) return *t;
    return std::nullopt;
}

std::vector<FixtureTable> ReferenceBackend::tables() const {
    std::shared_lock lock(mu_);
    return tables_;
}

std::size_t ReferenceBackend::row_count(std::string_view name) const {
    std::shared_lock lock(mu_);
    const auto* t = find(name);
    if (!t) throw Error(ErrorCode::UnknownTable, "no table '" + std::string(name) + "'");
    return t->rows.size();
}

void ReferenceBackend::create_table(const TableSchema& schema) {
    std::unique_lock lock(mu_);
    if (find(schema.name)) throw Error(ErrorCode::DuplicateName, "table '" + schema.name + "' already exists");
    if (schema.columns.empty()) throw Error(ErrorCode::InvalidArgument, "table '" + schema.name + "' needs columns");
    tables_.push_back({schema.name, schema.columns, {}});
}

void ReferenceBackend::put_table(FixtureTable table) {
    ResultTable{table.columns, table.rows}.validate();
    std::unique_lock lock(mu_);
    if (auto* t = find(table.name)) {
        *t = std::move(table);
    } else {
        tables_.push_back(std::move(table));
    }
}

void ReferenceBackend::drop_table(std::string_view name) {
    std::unique_lock lock(mu_);
    auto it = std::find_if(tables_.begin(), tables_.end(), [&](const FixtureTable& t) { return t.name == name; });
    if (it == tables_.end()) throw Error(ErrorCode::UnknownTable, "no table '" + std::string(name) + "'");
    tables_.erase(it);
}

void ReferenceBackend::rename_table(std::string_view from, std::string to) {
    std::unique_lock lock(mu_);
    auto* t = find(from);
    if (!t) throw Error(ErrorCode::UnknownTable, "no table '" + std::string(from) + "'");
    if (find(to)) throw Error(ErrorCode::DuplicateName, "table '" + to + "' already exists");
    t->name = std::move(to);
}

void ReferenceBackend::add_column(std::string_view table, Column column) {
    std::unique_lock lock(mu_);
    auto* t = find(table);
    if (!t) throw Error(ErrorCode::UnknownTable, "no table '" + std::string(table) + "'");
    for (const auto& c : t->columns) {
        if (c.name == column.name) throw Error(ErrorCode::DuplicateName, "column '" + column.name + "' already exists");
    }
    t->columns.push_back(std::move(column));
    for (auto& row : t->rows) row.emplace_back();
}

void ReferenceBackend::append_rows(std::string_view table, const std::vector<Row>& rows) {
    std::unique_lock lock(mu_);
    auto* t = find(table);
    if (!t) throw Error(ErrorCode::UnknownTable, "no table '" + std::string(table) + "'");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != t->columns.size()) {
            throw Error(ErrorCode::InvalidArgument, "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                                        " cells; table '" + t->name + "' has " +
                                                        std::to_string(t->columns.size()) + " columns");
        }
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (!value_fits(rows[r][c], t->columns[c].type)) {
                throw Error(ErrorCode::TypeMismatch, "row " + std::to_string(r) + " does not fit column '" +
                                                         t->columns[c].name + "'");
            }
        }
    }
    t->rows.insert(t->rows.end(), rows.begin(), rows.end());
}

std::string ReferenceBackend::to_fixture() const {
    std::shared_lock lock(mu_);
    return write_fixture(tables_);
}

// ---------------------------------------------------------------------------
// Nested-loop evaluation

namespace {

struct CellRef {
    std::size_t table = 0;
    std::size_t column = 0;
};

struct Condition {
    CellRef left;
    CompareOp op = CompareOp::Eq;
    std::optional<CellRef> right_cell;
    Value right_value;
    std::size_t depth = 0;  ///< deepest table it touches; checked once that table is bound
};

}  // namespace

ResultTable ReferenceBackend::query(std::string_view sql) const {
    const QueryAst ast = parse_sql(sql);
    std::shared_lock lock(mu_);

    std::vector<const FixtureTable*> from;
    std::vector<std::string> aliases;
    for (const auto& ref : ast.from_tables) {
        const auto* t = find(ref.name);
        if (!t) throw Error(ErrorCode::UnknownTable, "no table '" + ref.name + "'");
        from.push_back(t);
        aliases.push_back(ref.effective_name());
    }

    auto column_in = [&](std::size_t ti, const std::string& name) -> std::optional<std::size_t> {
        const auto& cols = from[ti]->columns;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (cols[c].name == name) return c;
        }
        return std::nullopt;
    };
    auto resolve = [&](const ColumnRef& ref) -> CellRef {
        if (ref.qualifier) {
            auto it = std::find(aliases.begin(), aliases.end(), *ref.qualifier);
            if (it == aliases.end()) throw Error(ErrorCode::UnknownTable, "'" + *ref.qualifier + "' is not in FROM");
            const std::size_t ti = static_cast<std::size_t>(it - aliases.begin());
            auto c = column_in(ti, ref.column);
            if (!c) throw Error(ErrorCode::UnknownColumn, "table '" + from[ti]->name + "' has no column '" + ref.column + "'");
            return {ti, *c};
        }
        std::optional<CellRef> hit;
        for (std::size_t ti = 0; ti < from.size(); ++ti) {
            if (auto c = column_in(ti, ref.column)) {
                if (hit) throw Error(ErrorCode::AmbiguousColumn, "column '" + ref.column + "' is ambiguous");
                hit = CellRef{ti, *c};
            }
        }
        if (!hit) throw Error(ErrorCode::UnknownColumn, "no column '" + ref.column + "'");
        return *hit;
    };
    auto type_of = [&](CellRef r) { return from[r.table]->columns[r.column].type; };

    std::vector<Condition> conditions;
    for (const auto& p : ast.where) {
        Condition cond;
        cond.left = resolve(p.left);
        cond.op = p.op;
        cond.depth = cond.left.table;
        const DataType lt = type_of(cond.left);
        if (const auto* rc = std::get_if<ColumnRef>(&p.right)) {
            cond.right_cell = resolve(*rc);
            if (!types_comparable(lt, type_of(*cond.right_cell))) {
                throw Error(ErrorCode::TypeMismatch, "incomparable columns in '" + render_column(p.left) + "'");
            }
            cond.depth = std::max(cond.depth, cond.right_cell->table);
        } else {
            const auto& lit = std::get<Literal>(p.right);
            const bool numeric_col = lt == DataType::Integer || lt == DataType::Real;
            const bool numeric_lit = lit.kind == DataType::Integer || lit.kind == DataType::Real;
            if (numeric_col && numeric_lit) {
                cond.right_value = lit.value;
            } else if (lt == DataType::Text && lit.kind == DataType::Text) {
                cond.right_value = lit.value;
            } else if (lt == DataType::Timestamp && lit.kind == DataType::Text &&
                       parse_timestamp(std::get<std::string>(lit.value))) {
                cond.right_value = *parse_timestamp(std::get<std::string>(lit.value));
            } else {
                throw Error(ErrorCode::TypeMismatch,
                            "cannot compare column '" + render_column(p.left) + "' with " + render_literal(lit));
            }
        }
        conditions.push_back(std::move(cond));
    }

    ResultTable out;
    std::vector<CellRef> outputs;
    if (ast.select_star) {
        for (std::size_t ti = 0; ti < from.size(); ++ti) {
            for (std::size_t c = 0; c < from[ti]->columns.size(); ++c) outputs.push_back({ti, c});
        }
    } else {
        for (const auto& item : ast.select_items) outputs.push_back(resolve(item));
    }
    for (auto r : outputs) out.columns.push_back({aliases[r.table] + "." + from[r.table]->columns[r.column].name, type_of(r)});
    std::vector<CellRef> order_keys;
    std::vector<bool> descending;
    for (const auto& o : ast.order_by) {
        order_keys.push_back(resolve(o.column));
        descending.push_back(o.descending);
    }

    std::vector<const Row*> bound(from.size(), nullptr);
    auto cell = [&](CellRef r) -> const Value& { return (*bound[r.table])[r.column]; };
    std::vector<Row> keys;
    std::function<void(std::size_t)> loop = [&](std::size_t depth) {
        for (const auto& row : from[depth]->rows) {
            bound[depth] = &row;
            bool ok = true;
            for (const auto& c : conditions) {
                if (c.depth != depth) continue;
                const Value& rhs = c.right_cell ? cell(*c.right_cell) : c.right_value;
                if (!evaluate(c.op, cell(c.left), rhs)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            if (depth + 1 < from.size()) {
                loop(depth + 1);
                continue;
            }
            Row result;
            result.reserve(outputs.size());
            for (auto r : outputs) result.push_back(cell(r));
            out.rows.push_back(std::move(result));
            Row key;
            for (auto r : order_keys) key.push_back(cell(r));
            keys.push_back(std::move(key));
        }
    };
    loop(0);

    sort_by_keys(out.rows, keys, descending);
    if (ast.limit && out.rows.size() > static_cast<std::size_t>(*ast.limit)) {
        out.rows.resize(static_cast<std::size_t>(*ast.limit));
    }
    return out;
}

std::shared_ptr<ReferenceBackend> load_reference_backend(std::string_view fixture_text) {
    return std::make_shared<ReferenceBackend>(parse_fixture(fixture_text));
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::BackendUnavailable, "cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::shared_ptr<ReferenceBackend> load_reference_backend_file(const std::filesystem::path& path) {
    return load_reference_backend(read_file(path));
}

// ---------------------------------------------------------------------------
// ReferenceDriver

void ReferenceDriver::attach(const std::string& name, std::shared_ptr<ReferenceBackend> store) {
    std::lock_guard lock(mu_);
    attached_["mem:" + name] = std::move(store);
}

void ReferenceDriver::detach(const std::string& name) {
    std::lock_guard lock(mu_);
    attached_.erase("mem:" + name);
}

void ReferenceDriver::set_offline(const std::string& connection, bool offline) {
    std::lock_guard lock(mu_);
    offline_[connection] = offline;
}

std::shared_ptr<ReferenceBackend> ReferenceDriver::resolve(const std::string& connection) {
    // Caller holds mu_.
    if (auto off = offline_.find(connection); off != offline_.end() && off->second) {
        throw Error(ErrorCode::BackendUnavailable, "'" + connection + "' is offline").with_target(connection);
    }
    if (connection.rfind("mem:", 0) == 0) {
        auto it = attached_.find(connection);
        if (it == attached_.end()) {
            throw Error(ErrorCode::BackendUnavailable, "no database attached as '" + connection + "'").with_target(connection);
        }
        return it->second;
    }
    if (connection.rfind("file:", 0) == 0) {
        const std::filesystem::path path = connection.substr(5);
        std::error_code ec;
        const auto mtime = std::filesystem::last_write_time(path, ec);
        const auto size = ec ? 0 : std::filesystem::file_size(path, ec);
        if (ec) throw Error(ErrorCode::BackendUnavailable, "cannot open '" + path.string() + "'").with_target(connection);
        auto cached = attached_.find(connection);
        auto state = files_.find(connection);
        if (cached != attached_.end() && state != files_.end() && state->second.mtime == mtime &&
            state->second.size == size) {
            return cached->second;
        }
        std::shared_ptr<ReferenceBackend> store;
        try {
            store = load_reference_backend_file(path);
        } catch (const Error& e) {
            throw Error(ErrorCode::BackendUnavailable, e.what()).with_target(connection);
        }
        attached_[connection] = store;
        files_[connection] = {mtime, size};
        return store;
    }
    throw Error(ErrorCode::BackendUnavailable, "unsupported connection string '" + connection + "'").with_target(connection);
}

std::shared_ptr<ReferenceBackend> ReferenceDriver::session_store(Handle handle) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(handle);
    if (it == sessions_.end()) {
        throw Error(ErrorCode::BackendUnavailable, "handle " + std::to_string(handle) + " is not open");
    }
    return resolve(it->second.connection);
}

Handle ReferenceDriver::open(const std::string& connection, const std::string&, const std::string&) {
    std::lock_guard lock(mu_);
    auto store = resolve(connection);
    const Handle h = next_handle_++;
    sessions_[h] = Session{connection, std::move(store)};
    return h;
}

ResultTable ReferenceDriver::execute(Handle handle, std::span<const std::string> select_fields,
                                     std::span<const std::string> tables, const std::string& where_clause) {
    auto store = session_store(handle);
    return store->query(compose_select(select_fields, tables, where_clause));
}

std::vector<TableSchema> ReferenceDriver::describe(Handle handle) { return session_store(handle)->describe(); }

void ReferenceDriver::close(Handle handle) {
    std::lock_guard lock(mu_);
    sessions_.erase(handle);
}

void ReferenceDriver::persist(Handle handle) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(handle);
    if (it == sessions_.end() || it->second.connection.rfind("file:", 0) != 0) return;
    const std::string& connection = it->second.connection;
    const std::filesystem::path path = connection.substr(5);
    auto store = attached_.at(connection);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << store->to_fixture();
    out.close();
    if (!out) throw Error(ErrorCode::BackendUnavailable, "cannot write '" + path.string() + "'").with_target(connection);
    std::error_code ec;
    files_[connection] = {std::filesystem::last_write_time(path, ec), std::filesystem::file_size(path, ec)};
}

void ReferenceDriver::create_table(Handle handle, const TableSchema& schema) {
    session_store(handle)->create_table(schema);
    persist(handle);
}

void ReferenceDriver::append_rows(Handle handle, const std::string& table, const std::vector<Row>& rows) {
    session_store(handle)->append_rows(table, rows);
    persist(handle);
}

std::size_t ReferenceDriver::open_handle_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

void DriverRegistry::add(std::shared_ptr<BackendAdapter> adapter) {
    auto name = adapter->driver_name();
    drivers_[name] = std::move(adapter);
}

std::shared_ptr<BackendAdapter> DriverRegistry::find(std::string_view driver_name) const {
    auto it = drivers_.find(driver_name);
    return it == drivers_.end() ? nullptr : it->second;
}

}  // namespace fedsql
