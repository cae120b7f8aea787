// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/executor.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <unordered_map>

#include "fedsql/error.hpp"

namespace fedsql {

namespace {

std::size_t hash_key_value(const Value& v) {
    switch (v.index()) {
        case 1: {
            // Integers and reals that compare equal must hash equal.
            const double d = static_cast<double>(std::get<std::int64_t>(v));
            return std::hash<double>{}(d == 0.0 ? 0.0 : d);
        }
        case 2: {
            const double d = std::get<double>(v);
            return std::hash<double>{}(d == 0.0 ? 0.0 : d);
        }
        case 3: return std::hash<std::string>{}(std::get<std::string>(v));
        case 4: return std::hash<std::int64_t>{}(std::get<Timestamp>(v).seconds) ^ 0x9e3779b97f4a7c15ULL;
    }
    return 0;
}

void check_cap(std::size_t cells, std::size_t max_cells) {
    if (cells > max_cells) {
        throw Error(ErrorCode::ResultTooLarge,
                    "intermediate result exceeds the cap of " + std::to_string(max_cells) + " cells");
    }
}

}  // namespace

ResultTable hash_equi_join(const ResultTable& left, const ResultTable& right, const KeyIndexPairs& keys,
                           std::size_t max_cells) {
    for (const auto& [l, r] : keys) {
        if (l >= left.width() || r >= right.width()) throw Error(ErrorCode::InvalidArgument, "join key index out of range");
        if (!types_comparable(left.columns[l].type, right.columns[r].type)) {
            throw Error(ErrorCode::TypeMismatch, "cannot join " + left.columns[l].name + " (" +
                                                     std::string(data_type_name(left.columns[l].type)) + ") with " +
                                                     right.columns[r].name + " (" +
                                                     std::string(data_type_name(right.columns[r].type)) + ")");
        }
    }
    ResultTable out;
    out.columns = left.columns;
    out.columns.insert(out.columns.end(), right.columns.begin(), right.columns.end());
    const std::size_t width = out.width();

    auto key_hash = [&](const Row& row, bool is_left) -> std::optional<std::size_t> {
        std::size_t h = 0x12345;
        for (const auto& [l, r] : keys) {
            const Value& v = row[is_left ? l : r];
            if (is_null(v)) return std::nullopt;
            h ^= hash_key_value(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    };

    std::unordered_multimap<std::size_t, std::size_t> build;
    build.reserve(right.rows.size());
    for (std::size_t i = 0; i < right.rows.size(); ++i) {
        if (auto h = key_hash(right.rows[i], false)) build.emplace(*h, i);
    }
    std::vector<std::size_t> matches;
    for (const auto& lrow : left.rows) {
        auto h = key_hash(lrow, true);
        if (!h) continue;
        matches.clear();
        auto [first, last] = build.equal_range(*h);
        for (auto it = first; it != last; ++it) {
            const Row& rrow = right.rows[it->second];
            bool equal = true;
            for (const auto& [l, r] : keys) {
                if (!evaluate(CompareOp::Eq, lrow[l], rrow[r])) {
                    equal = false;
                    break;
                }
            }
            if (equal) matches.push_back(it->second);
        }
        // Bucket order is unspecified; keep right-side row order stable.
        std::sort(matches.begin(), matches.end());
        for (auto ri : matches) {
            check_cap((out.rows.size() + 1) * width, max_cells);
            Row row;
            row.reserve(width);
            row.insert(row.end(), lrow.begin(), lrow.end());
            row.insert(row.end(), right.rows[ri].begin(), right.rows[ri].end());
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

ResultTable apply_residual(const ResultTable& table, std::span<const RowPredicate> predicates) {
    ResultTable out;
    out.columns = table.columns;
    for (const auto& row : table.rows) {
        bool keep = true;
        for (const auto& p : predicates) {
            const Value& rhs = std::holds_alternative<std::size_t>(p.right) ? row.at(std::get<std::size_t>(p.right))
                                                                            : std::get<Value>(p.right);
            if (!evaluate(p.op, row.at(p.left), rhs)) {
                keep = false;
                break;
            }
        }
        if (keep) out.rows.push_back(row);
    }
    return out;
}

ResultTable project(const ResultTable& table, std::span<const std::string> columns) {
    std::vector<std::size_t> idx;
    ResultTable out;
    for (const auto& name : columns) {
        auto i = table.column_index(name);
        if (!i) throw Error(ErrorCode::UnknownColumn, "no column '" + name + "' to project");
        idx.push_back(*i);
        out.columns.push_back(table.columns[*i]);
    }
    out.rows.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Row r;
        r.reserve(idx.size());
        for (auto i : idx) r.push_back(row[i]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

namespace {

ResultTable run_subquery(const SubQuery& sq, const SourceConnections& sources, PeerClient* peers) {
    ResultTable result;
    if (sq.target.is_local()) {
        auto it = sources.find(sq.target.id);
        if (it == sources.end() || !it->second.adapter) {
            throw Error(ErrorCode::BackendUnavailable, "no connection for source '" + sq.target.id + "'")
                .with_target(sq.target.id);
        }
        try {
            result = it->second.adapter->execute(it->second.handle, sq.select_fields(), sq.tables, sq.where_clause());
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BackendUnavailable) throw;
            throw Error(ErrorCode::BackendUnavailable, "source '" + sq.target.id + "' unavailable: " + e.what())
                .with_target(sq.target.id);
        } catch (const std::exception& e) {
            throw Error(ErrorCode::BackendUnavailable, "source '" + sq.target.id + "' failed: " + e.what())
                .with_target(sq.target.id);
        }
    } else {
        if (!peers) {
            throw Error(ErrorCode::RemoteError, "no peer client configured for " + sq.target.id).with_target(sq.target.id);
        }
        result = peers->query(sq.target.id, render_subquery(sq));
    }
    if (!sq.select_all) {
        if (result.width() != sq.output.size()) {
            throw Error(sq.target.is_local() ? ErrorCode::Internal : ErrorCode::DecodeError,
                        "target " + sq.target.key() + " returned " + std::to_string(result.width()) +
                            " columns, expected " + std::to_string(sq.output.size()));
        }
        for (std::size_t c = 0; c < sq.output.size(); ++c) result.columns[c].name = sq.output[c].name;
    }
    return result;
}

std::size_t require_column(const ResultTable& t, const std::string& name) {
    auto i = t.column_index(name);
    if (!i) throw Error(ErrorCode::Internal, "merge input lacks column '" + name + "'");
    return *i;
}

}  // namespace

ResultTable execute_plan(const QueryPlan& plan, const SourceConnections& sources, PeerClient* peers,
                         const ExecutionOptions& options) {
    const auto& subs = plan.subqueries;
    if (subs.empty()) throw Error(ErrorCode::InvalidArgument, "plan has no sub-queries");

    std::vector<ResultTable> results(subs.size());
    if (options.concurrent && subs.size() > 1) {
        std::vector<std::future<ResultTable>> pending;
        pending.reserve(subs.size());
        for (const auto& sq : subs) {
            pending.push_back(std::async(std::launch::async, [&sq, &sources, peers] { return run_subquery(sq, sources, peers); }));
        }
        std::exception_ptr first_error;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            try {
                results[i] = pending[i].get();
            } catch (...) {
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);
    } else {
        for (std::size_t i = 0; i < subs.size(); ++i) results[i] = run_subquery(subs[i], sources, peers);
    }
    for (const auto& r : results) check_cap(r.cell_count(), options.max_cells);

    ResultTable merged = std::move(results[plan.merge.first_input]);
    for (const auto& step : plan.merge.join_steps) {
        const ResultTable& right = results.at(step.right_input);
        KeyIndexPairs keys;
        for (const auto& k : step.keys) keys.emplace_back(require_column(merged, k.left), require_column(right, k.right));
        merged = hash_equi_join(merged, right, keys, options.max_cells);
    }

    if (!plan.merge.residual_predicates.empty()) {
        std::vector<RowPredicate> preds;
        for (const auto& p : plan.merge.residual_predicates) {
            RowPredicate rp;
            rp.left = require_column(merged, merged_name(plan.query, p.left));
            rp.op = p.op;
            if (const auto* rc = std::get_if<BoundColumn>(&p.right)) {
                rp.right = require_column(merged, merged_name(plan.query, *rc));
            } else {
                rp.right = std::get<Literal>(p.right).value;
            }
            preds.push_back(std::move(rp));
        }
        merged = apply_residual(merged, preds);
    }

    std::vector<std::string> names;
    for (const auto& item : plan.merge.projection) {
        if (item.column) {
            names.push_back(item.alias + "." + *item.column);
            continue;
        }
        const std::string prefix = item.alias + ".";
        for (const auto& c : merged.columns) {
            if (c.name.compare(0, prefix.size(), prefix) == 0) names.push_back(c.name);
        }
    }
    std::vector<std::size_t> order_idx;
    std::vector<bool> descending;
    for (const auto& o : plan.order_by) {
        order_idx.push_back(require_column(merged, o.column));
        descending.push_back(o.descending);
    }
    std::vector<Row> keys;
    keys.reserve(merged.rows.size());
    for (const auto& row : merged.rows) {
        Row k;
        for (auto i : order_idx) k.push_back(row[i]);
        keys.push_back(std::move(k));
    }
    ResultTable out = project(merged, names);
    sort_by_keys(out.rows, keys, descending);
    if (plan.limit && out.rows.size() > static_cast<std::size_t>(*plan.limit)) {
        out.rows.resize(static_cast<std::size_t>(*plan.limit));
    }
    return out;
}

}  // namespace fedsql
