// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedsql/backend.hpp"
#include "fedsql/catalog.hpp"
#include "fedsql/executor.hpp"
#include "fedsql/planner.hpp"

namespace fedsql {

/// What one federated query did; used for request logs and tests.
struct QueryTrace {
    std::size_t subqueries = 0;
    std::vector<std::string> forwarded_to;  ///< peer URLs, one per remote fragment
};

struct FederationContext {
    const DataDictionary* dictionary = nullptr;
    const SourceConnections* sources = nullptr;
    ReplicaLookup lookup;
    PeerClient* peers = nullptr;
    ExecutionOptions options;
    /// When false every table must be local (the request was itself forwarded).
    bool allow_forward = true;
};

/// parse -> resolve -> partition -> plan -> execute.
ResultTable federated_query(std::string_view sql, const FederationContext& ctx, QueryTrace* trace = nullptr);

struct SourceDefinition {
    std::string source_id;
    std::shared_ptr<BackendAdapter> adapter;
    std::string url;
    std::string username;
    std::string password;
    /// Catalog to use; introspected from the backend when absent.
    std::optional<LowerSpec> spec;
};

/// A set of sources opened together and queried as one virtual database,
/// without peers. Handles are closed on destruction.
class LocalFederation {
public:
    explicit LocalFederation(std::vector<SourceDefinition> sources, ExecutionOptions options = {});
    ~LocalFederation();

    LocalFederation(const LocalFederation&) = delete;
    LocalFederation& operator=(const LocalFederation&) = delete;

    ResultTable query(std::string_view sql) const;

    const UpperSpec& upper() const { return upper_; }
    const LowerSpecMap& lowers() const { return lowers_; }
    const DataDictionary& dictionary() const { return dictionary_; }

private:
    std::vector<SourceDefinition> defs_;
    UpperSpec upper_;
    LowerSpecMap lowers_;
    DataDictionary dictionary_;
    SourceConnections connections_;
    ExecutionOptions options_;
};

}  // namespace fedsql
