// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fedsql/backend.hpp"
#include "fedsql/federation.hpp"
#include "fedsql/result_table.hpp"

namespace fedsql {

struct ColumnMapping {
    std::string target_column;
    std::size_t source_index = 0;  ///< position in the source query's select list
    DataType type = DataType::Text;

    bool operator==(const ColumnMapping&) const = default;
};

/// Denormalizing query plus how its select items land in a warehouse table.
struct StarMapping {
    std::string target_table;
    std::string source_query;
    std::vector<ColumnMapping> columns;

    bool operator==(const StarMapping&) const = default;
};

struct ViewDef {
    std::string name;
    std::string query;

    bool operator==(const ViewDef&) const = default;
};

struct EtlJob {
    std::vector<StarMapping> mappings;
    std::vector<ViewDef> views;

    bool operator==(const EtlJob&) const = default;
};

/// Job file: `#` comments, and blocks of
///   target <table> / query <sql> / map <col>=<index>:<type> ...
///   view <name> / query <sql>
/// Throws InvalidArgument with the offending line number.
EtlJob parse_job(std::string_view text);

/// A single-table fixture file between extract and load.
struct StageFile {
    std::filesystem::path path;
    std::size_t row_count = 0;
    std::uintmax_t byte_size = 0;
};

enum class Phase { Extract, Load };
std::string_view phase_name(Phase phase);

/// Wall time including connection open/close on both ends of the phase.
struct PhaseTiming {
    Phase phase = Phase::Extract;
    double duration_ms = 0;
    std::size_t rows = 0;
    std::uintmax_t bytes = 0;
};

/// Where a phase writes to or reads from.
struct TargetStore {
    std::shared_ptr<BackendAdapter> adapter;
    std::string url;
    std::string username;
    std::string password;
};

/// Checks mapping indices and types against the query's select width before
/// anything runs. Throws InvalidArgument.
void validate_mapping(const StarMapping& mapping, const DataDictionary& dictionary);

/// Reorders and coerces query output per the mapping; integers widen to real,
/// any other type change is TypeMismatch.
ResultTable apply_mapping(const ResultTable& result, const StarMapping& mapping);

struct ExtractResult {
    StageFile stage;
    PhaseTiming timing;
};

/// Opens the sources, runs the mapping's query and writes the stage file
/// `<stage_dir>/<target_table>.stage`. Throws StageWriteFailed.
ExtractResult extract_transform(const std::vector<SourceDefinition>& sources, const StarMapping& mapping,
                                const std::filesystem::path& stage_dir, const ExecutionOptions& execution = {});

struct LoadResult {
    std::size_t rows = 0;
    PhaseTiming timing;
};

/// Appends the stage's rows to an existing table, all or nothing.
/// Throws MalformedStage, UnknownTable, BackendUnavailable.
LoadResult load(const StageFile& stage, const TargetStore& target, const std::string& target_table);

/// Reads a stage file back; throws MalformedStage.
FixtureTable read_stage(const std::filesystem::path& path);

/// Creates `table` on the target unless it already exists.
void ensure_table(const TargetStore& target, const TableSchema& schema);

/// Mart column names for a view result: the column part of each `alias.col`
/// name, qualified as `alias_col` only where two would clash.
std::vector<Column> mart_columns(const std::vector<Column>& result_columns);

struct MaterializeResult {
    StageFile stage;
    PhaseTiming extract;
    PhaseTiming load;
};

/// Evaluates the view over the warehouse, stages it and loads it into a mart
/// table named after the view (created when absent).
MaterializeResult materialize_view(const SourceDefinition& warehouse, const ViewDef& view, const TargetStore& mart,
                                   const std::filesystem::path& stage_dir, const ExecutionOptions& execution = {});

struct JobStep {
    std::string target;  ///< warehouse table or mart view name
    PhaseTiming timing;
};

struct JobReport {
    std::vector<JobStep> steps;
};

struct JobOptions {
    std::filesystem::path stage_dir = std::filesystem::temp_directory_path();
    /// Skip the stage file and move rows in memory.
    bool direct = false;
    /// Bulk extracts usually need a larger cell cap than interactive queries.
    ExecutionOptions execution;
};

/// Runs every mapping into the warehouse, then every view into the mart.
/// Warehouse tables are created from the mappings when absent.
JobReport run_job(const EtlJob& job, const std::vector<SourceDefinition>& sources, const TargetStore& warehouse,
                  const std::string& warehouse_id, const TargetStore* mart, const JobOptions& options = {});

/// `phase,rows,bytes,duration_ms`
std::string timings_csv(const std::vector<PhaseTiming>& timings);

}  // namespace fedsql
