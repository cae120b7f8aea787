// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/federation.hpp"

#include "fedsql/error.hpp"
#include "fedsql/sql.hpp"

namespace fedsql {

ResultTable federated_query(std::string_view sql, const FederationContext& ctx, QueryTrace* trace) {
    static const DataDictionary kEmptyDictionary;
    static const SourceConnections kNoSources;
    const QueryAst ast = parse_sql(sql);
    const BoundQuery bq = resolve_names(ast, ctx.dictionary ? *ctx.dictionary : kEmptyDictionary);
    if (!ctx.allow_forward) {
        for (const auto& t : bq.tables) {
            if (!t.local) {
                throw Error(ErrorCode::UnknownTable, "table '" + t.logical_name +
                                                         "' is not registered here and forwarding is disabled");
            }
        }
    }
    const Partition partition = partition_tables(bq, ctx.lookup);
    const QueryPlan qp = plan(bq, partition);
    if (trace) {
        trace->subqueries = qp.subqueries.size();
        for (const auto& sq : qp.subqueries) {
            if (!sq.target.is_local()) trace->forwarded_to.push_back(sq.target.id);
        }
    }
    return execute_plan(qp, ctx.sources ? *ctx.sources : kNoSources, ctx.peers, ctx.options);
}

LocalFederation::LocalFederation(std::vector<SourceDefinition> sources, ExecutionOptions options)
    : defs_(std::move(sources)), options_(options) {
    try {
        for (auto& def : defs_) {
            if (!def.adapter) throw Error(ErrorCode::InvalidArgument, "source '" + def.source_id + "' has no adapter");
            if (upper_.find(def.source_id)) {
                throw Error(ErrorCode::DuplicateSourceId, "duplicate source id '" + def.source_id + "'");
            }
            const Handle h = def.adapter->open(def.url, def.username, def.password);
            connections_[def.source_id] = SourceConnection{def.adapter.get(), h};
            LowerSpec spec = def.spec ? *def.spec : introspect(*def.adapter, h, def.source_id);
            upper_.entries.push_back({def.source_id, def.url, def.adapter->driver_name(), "inline:" + def.source_id});
            lowers_.emplace(def.source_id, std::move(spec));
        }
        dictionary_ = build_dictionary(upper_, lowers_);
    } catch (...) {
        for (auto& [id, conn] : connections_) conn.adapter->close(conn.handle);
        throw;
    }
}

LocalFederation::~LocalFederation() {
    for (auto& [id, conn] : connections_) {
        try {
            conn.adapter->close(conn.handle);
        } catch (...) {
        }
    }
}

ResultTable LocalFederation::query(std::string_view sql) const {
    FederationContext ctx;
    ctx.dictionary = &dictionary_;
    ctx.sources = &connections_;
    ctx.options = options_;
    ctx.allow_forward = false;
    return federated_query(sql, ctx);
}

}  // namespace fedsql
