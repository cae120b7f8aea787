// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/error.hpp"
#include "fedsql/sql.hpp"

namespace fedsql {

bool BoundQuery::has_remote() const {
    for (const auto& t : tables) {
        if (!t.local) return true;
    }
    return false;
}

std::string merged_name(const BoundQuery& bq, const BoundColumn& col) {
    return bq.tables.at(col.table).alias + "." + col.logical;
}

namespace {

class Resolver {
public:
    Resolver(const QueryAst& ast, const DataDictionary& dict) : ast_(ast), dict_(dict) {}

    BoundQuery run() {
        bind_tables();
        out_.select_star = ast_.select_star;
        for (const auto& item : ast_.select_items) out_.select.push_back(bind_column(item));
        for (const auto& p : ast_.where) out_.where.push_back(bind_predicate(p));
        for (const auto& o : ast_.order_by) out_.order_by.push_back({bind_column(o.column), o.descending});
        out_.limit = ast_.limit;
        return std::move(out_);
    }

private:
    void bind_tables() {
        for (const auto& ref : ast_.from_tables) {
            BoundTable t;
            t.logical_name = ref.name;
            t.alias = ref.effective_name();
            if (const TableBinding* b = dict_.find_table(ref.name)) {
                t.local = true;
                t.source_id = b->source_id;
                t.physical_name = b->physical_table;
                for (const auto& col : b->columns) {
                    const ColumnBinding* cb = dict_.find_column(ref.name, col);
                    t.columns.push_back({col, cb->physical_column, cb->type});
                }
            }
            out_.tables.push_back(std::move(t));
        }
    }

    BoundColumn column_of(std::size_t table_index, const std::string& column) const {
        const BoundTable& t = out_.tables[table_index];
        if (!t.local) return BoundColumn{table_index, column, column, std::nullopt};
        for (const auto& c : t.columns) {
            if (c.logical == column) return BoundColumn{table_index, c.logical, c.physical, c.type};
        }
        throw Error(ErrorCode::UnknownColumn, "table '" + t.logical_name + "' has no column '" + column + "'");
    }

    static bool has_column(const BoundTable& t, const std::string& column) {
        for (const auto& c : t.columns) {
            if (c.logical == column) return true;
        }
        return false;
    }

    BoundColumn bind_column(const ColumnRef& ref) const {
        if (ref.qualifier) {
            for (std::size_t i = 0; i < out_.tables.size(); ++i) {
                if (out_.tables[i].alias == *ref.qualifier) return column_of(i, ref.column);
            }
            throw Error(ErrorCode::UnknownTable, "'" + *ref.qualifier + "' does not name a table in FROM");
        }
        // Unqualified: a unique local owner wins; otherwise a lone remote table
        // is assumed to own it.
        std::vector<std::size_t> local_hits, remote_tables;
        for (std::size_t i = 0; i < out_.tables.size(); ++i) {
            const auto& t = out_.tables[i];
            if (!t.local) {
                remote_tables.push_back(i);
            } else if (has_column(t, ref.column)) {
                local_hits.push_back(i);
            }
        }
        if (local_hits.size() > 1) {
            throw Error(ErrorCode::AmbiguousColumn, "column '" + ref.column + "' matches more than one table");
        }
        if (local_hits.size() == 1) return column_of(local_hits[0], ref.column);
        if (remote_tables.size() == 1) return column_of(remote_tables[0], ref.column);
        if (remote_tables.size() > 1) {
            throw Error(ErrorCode::AmbiguousColumn,
                        "column '" + ref.column + "' must be qualified: several remote tables may own it");
        }
        throw Error(ErrorCode::UnknownColumn, "no table in FROM has column '" + ref.column + "'");
    }

    static Literal coerce_literal(const BoundColumn& col, const Literal& lit) {
        if (!col.type) return lit;
        const DataType type = *col.type;
        const bool numeric_col = type == DataType::Integer || type == DataType::Real;
        const bool numeric_lit = lit.kind == DataType::Integer || lit.kind == DataType::Real;
        if (numeric_col && numeric_lit) return lit;
        if (type == DataType::Text && lit.kind == DataType::Text) return lit;
        if (type == DataType::Timestamp && lit.kind == DataType::Text) {
            if (auto ts = parse_timestamp(std::get<std::string>(lit.value))) return Literal{DataType::Timestamp, *ts};
        }
        if (type == DataType::Timestamp && lit.kind == DataType::Timestamp) return lit;
        throw Error(ErrorCode::TypeMismatch, "cannot compare " + std::string(data_type_name(type)) + " column '" +
                                                 col.logical + "' with literal " + render_literal(lit));
    }

    BoundPredicate bind_predicate(const Predicate& p) const {
        BoundPredicate out;
        out.left = bind_column(p.left);
        out.op = p.op;
        if (const auto* rc = std::get_if<ColumnRef>(&p.right)) {
            BoundColumn right = bind_column(*rc);
            if (out.left.type && right.type && !types_comparable(*out.left.type, *right.type)) {
                throw Error(ErrorCode::TypeMismatch, "cannot compare " + std::string(data_type_name(*out.left.type)) +
                                                         " column '" + out.left.logical + "' with " +
                                                         std::string(data_type_name(*right.type)) + " column '" +
                                                         right.logical + "'");
            }
            out.right = std::move(right);
        } else {
            out.right = coerce_literal(out.left, std::get<Literal>(p.right));
        }
        return out;
    }

    const QueryAst& ast_;
    const DataDictionary& dict_;
    BoundQuery out_;
};

}  // namespace

BoundQuery resolve_names(const QueryAst& ast, const DataDictionary& dict) { return Resolver(ast, dict).run(); }

}  // namespace fedsql
