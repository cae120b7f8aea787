// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/etl.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "fedsql/error.hpp"
#include "fedsql/sql.hpp"

namespace fedsql {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void job_error(std::size_t line, const std::string& msg) {
    throw Error(ErrorCode::InvalidArgument, "job file line " + std::to_string(line) + ": " + msg);
}

ColumnMapping parse_map(const std::string& body, std::size_t line) {
    const auto eq = body.find('=');
    const auto colon = body.rfind(':');
    if (eq == std::string::npos || colon == std::string::npos || colon < eq) {
        job_error(line, "expected map <column>=<index>:<type>");
    }
    ColumnMapping m;
    m.target_column = trim(body.substr(0, eq));
    const std::string index = trim(body.substr(eq + 1, colon - eq - 1));
    const std::string type = trim(body.substr(colon + 1));
    if (!is_identifier(m.target_column)) job_error(line, "bad column name '" + m.target_column + "'");
    auto [p, ec] = std::from_chars(index.data(), index.data() + index.size(), m.source_index);
    if (ec != std::errc() || p != index.data() + index.size() || index.empty()) job_error(line, "bad index '" + index + "'");
    auto dt = data_type_from_name(type);
    if (!dt) job_error(line, "unknown type '" + type + "'");
    m.type = *dt;
    return m;
}

/// Width of the query's output row without running it.
std::size_t select_width(const QueryAst& ast, const DataDictionary& dictionary) {
    if (!ast.select_star) return ast.select_items.size();
    const BoundQuery bq = resolve_names(ast, dictionary);
    std::size_t width = 0;
    for (const auto& t : bq.tables) {
        if (!t.local) throw Error(ErrorCode::UnknownTable, "table '" + t.logical_name + "' is not among the sources");
        width += t.columns.size();
    }
    return width;
}

Value coerce(const Value& v, DataType type) {
    if (type == DataType::Real && std::holds_alternative<std::int64_t>(v)) {
        return Value{static_cast<double>(std::get<std::int64_t>(v))};
    }
    if (is_null(v) || value_fits(v, type)) return v;
    throw Error(ErrorCode::TypeMismatch, "value " + value_to_text(v) + " does not fit " + std::string(data_type_name(type)));
}

TableSchema mapping_schema(const StarMapping& mapping) {
    TableSchema s{mapping.target_table, {}};
    for (const auto& c : mapping.columns) s.columns.push_back({c.target_column, c.type});
    return s;
}

struct OpenTarget {
    const TargetStore& store;
    Handle handle;

    explicit OpenTarget(const TargetStore& s) : store(s), handle(open(s)) {}
    ~OpenTarget() {
        try {
            store.adapter->close(handle);
        } catch (...) {
        }
    }
    OpenTarget(const OpenTarget&) = delete;
    OpenTarget& operator=(const OpenTarget&) = delete;

    static Handle open(const TargetStore& s) {
        if (!s.adapter) throw Error(ErrorCode::InvalidArgument, "target has no adapter");
        try {
            return s.adapter->open(s.url, s.username, s.password);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::BackendUnavailable) throw;
            throw Error(ErrorCode::BackendUnavailable, e.what()).with_target(s.url);
        }
    }

    std::optional<TableSchema> find(const std::string& table) {
        for (auto& t : store.adapter->describe(handle)) {
            if (t.name == table) return t;
        }
        return std::nullopt;
    }
};

/// Runs the mapping query over freshly opened sources and maps the result.
ResultTable extract_rows(const std::vector<SourceDefinition>& sources, const StarMapping& mapping,
                         const ExecutionOptions& execution) {
    const QueryAst ast = parse_sql(mapping.source_query);
    if (!ast.select_star) validate_mapping(mapping, DataDictionary{});
    LocalFederation fed(sources, execution);
    validate_mapping(mapping, fed.dictionary());
    return apply_mapping(fed.query(mapping.source_query), mapping);
}

StageFile write_stage(const fs::path& path, const std::string& table, const ResultTable& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StageWriteFailed, "cannot open stage file " + path.string());
    FixtureTable header{table, rows.columns, {}};
    std::string head = write_fixture(std::span<const FixtureTable>(&header, 1));
    out << head;
    constexpr std::size_t kChunk = 1024;
    for (std::size_t i = 0; i < rows.rows.size(); i += kChunk) {
        const std::size_t n = std::min(kChunk, rows.rows.size() - i);
        out << write_fixture_rows(rows.columns, std::span<const Row>(rows.rows.data() + i, n));
    }
    out.flush();
    if (!out) throw Error(ErrorCode::StageWriteFailed, "cannot write stage file " + path.string());
    out.close();
    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    if (ec) throw Error(ErrorCode::StageWriteFailed, "cannot stat stage file " + path.string());
    return StageFile{path, rows.rows.size(), size};
}

void check_stage_schema(const FixtureTable& stage, const TableSchema& target) {
    if (stage.columns.size() != target.columns.size()) {
        throw Error(ErrorCode::MalformedStage, "stage has " + std::to_string(stage.columns.size()) +
                                                   " columns but table '" + target.name + "' has " +
                                                   std::to_string(target.columns.size()));
    }
    for (std::size_t i = 0; i < stage.columns.size(); ++i) {
        if (stage.columns[i].type != target.columns[i].type) {
            throw Error(ErrorCode::MalformedStage, "stage column '" + stage.columns[i].name +
                                                       "' type differs from table column '" +
                                                       target.columns[i].name + "'");
        }
    }
}

/// Appends rows to an existing, schema-compatible table.
void append_checked(OpenTarget& t, const std::string& table, const FixtureTable& data) {
    auto schema = t.find(table);
    if (!schema) throw Error(ErrorCode::UnknownTable, "target table '" + table + "' does not exist");
    check_stage_schema(data, *schema);
    if (!data.rows.empty()) t.store.adapter->append_rows(t.handle, table, data.rows);
}

}  // namespace

EtlJob parse_job(std::string_view text) {
    EtlJob job;
    enum class Block { None, Mapping, View } block = Block::None;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    auto finish_block = [&](std::size_t line) {
        if (block == Block::Mapping) {
            const auto& m = job.mappings.back();
            if (m.source_query.empty()) job_error(line, "target '" + m.target_table + "' has no query");
            if (m.columns.empty()) job_error(line, "target '" + m.target_table + "' has no map lines");
        } else if (block == Block::View && job.views.back().query.empty()) {
            job_error(line, "view '" + job.views.back().name + "' has no query");
        }
    };
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto sp = line.find_first_of(" \t");
        const std::string keyword = line.substr(0, sp);
        const std::string rest = sp == std::string::npos ? "" : trim(line.substr(sp));
        if (keyword == "target" || keyword == "view") {
            finish_block(line_no);
            if (!is_identifier(rest)) job_error(line_no, "bad name '" + rest + "'");
            if (keyword == "target") {
                job.mappings.push_back({rest, "", {}});
                block = Block::Mapping;
            } else {
                job.views.push_back({rest, ""});
                block = Block::View;
            }
        } else if (keyword == "query") {
            if (rest.empty()) job_error(line_no, "empty query");
            std::string* slot = block == Block::Mapping ? &job.mappings.back().source_query
                                : block == Block::View  ? &job.views.back().query
                                                        : nullptr;
            if (!slot) job_error(line_no, "query outside a target or view block");
            if (!slot->empty()) job_error(line_no, "second query in one block");
            *slot = rest;
        } else if (keyword == "map") {
            if (block != Block::Mapping) job_error(line_no, "map outside a target block");
            job.mappings.back().columns.push_back(parse_map(rest, line_no));
        } else {
            job_error(line_no, "unknown keyword '" + keyword + "'");
        }
    }
    finish_block(line_no);
    return job;
}

std::string_view phase_name(Phase phase) { return phase == Phase::Extract ? "extract" : "load"; }

void validate_mapping(const StarMapping& mapping, const DataDictionary& dictionary) {
    if (!is_identifier(mapping.target_table)) {
        throw Error(ErrorCode::InvalidArgument, "bad target table '" + mapping.target_table + "'");
    }
    if (mapping.columns.empty()) throw Error(ErrorCode::InvalidArgument, "mapping has no columns");
    const std::size_t width = select_width(parse_sql(mapping.source_query), dictionary);
    std::set<std::string> seen;
    for (const auto& c : mapping.columns) {
        if (!seen.insert(c.target_column).second) {
            throw Error(ErrorCode::InvalidArgument, "target column '" + c.target_column + "' mapped twice");
        }
        if (c.source_index >= width) {
            throw Error(ErrorCode::InvalidArgument, "column '" + c.target_column + "' maps index " +
                                                        std::to_string(c.source_index) + " but the query selects " +
                                                        std::to_string(width) + " items");
        }
    }
}

ResultTable apply_mapping(const ResultTable& result, const StarMapping& mapping) {
    ResultTable out;
    for (const auto& c : mapping.columns) {
        if (c.source_index >= result.width()) {
            throw Error(ErrorCode::InvalidArgument, "mapping index " + std::to_string(c.source_index) + " out of range");
        }
        const DataType src = result.columns[c.source_index].type;
        if (src != c.type && !(src == DataType::Integer && c.type == DataType::Real)) {
            throw Error(ErrorCode::TypeMismatch, "column '" + result.columns[c.source_index].name + "' is " +
                                                     std::string(data_type_name(src)) + ", mapping wants " +
                                                     std::string(data_type_name(c.type)));
        }
        out.columns.push_back({c.target_column, c.type});
    }
    out.rows.reserve(result.rows.size());
    for (const auto& row : result.rows) {
        Row r;
        r.reserve(mapping.columns.size());
        for (const auto& c : mapping.columns) r.push_back(coerce(row[c.source_index], c.type));
        out.rows.push_back(std::move(r));
    }
    return out;
}

ExtractResult extract_transform(const std::vector<SourceDefinition>& sources, const StarMapping& mapping,
                                const fs::path& stage_dir, const ExecutionOptions& execution) {
    const auto start = Clock::now();
    const ResultTable rows = extract_rows(sources, mapping, execution);
    std::error_code ec;
    fs::create_directories(stage_dir, ec);
    StageFile stage = write_stage(stage_dir / (mapping.target_table + ".stage"), mapping.target_table, rows);
    PhaseTiming t{Phase::Extract, elapsed_ms(start), stage.row_count, stage.byte_size};
    return {std::move(stage), t};
}

FixtureTable read_stage(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MalformedStage, "cannot read stage file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::vector<FixtureTable> tables;
    try {
        tables = parse_fixture(ss.str());
    } catch (const Error& e) {
        throw Error(ErrorCode::MalformedStage, path.string() + ": " + e.what());
    }
    if (tables.size() != 1) throw Error(ErrorCode::MalformedStage, path.string() + ": expected exactly one table");
    return std::move(tables.front());
}

LoadResult load(const StageFile& stage, const TargetStore& target, const std::string& target_table) {
    const auto start = Clock::now();
    FixtureTable data = read_stage(stage.path);
    OpenTarget t(target);
    append_checked(t, target_table, data);
    const std::size_t rows = data.rows.size();
    std::error_code ec;
    const auto bytes = fs::file_size(stage.path, ec);
    return {rows, PhaseTiming{Phase::Load, elapsed_ms(start), rows, ec ? stage.byte_size : bytes}};
}

void ensure_table(const TargetStore& target, const TableSchema& schema) {
    OpenTarget t(target);
    if (!t.find(schema.name)) target.adapter->create_table(t.handle, schema);
}

std::vector<Column> mart_columns(const std::vector<Column>& result_columns) {
    auto bare = [](const std::string& name) {
        const auto dot = name.rfind('.');
        return dot == std::string::npos ? name : name.substr(dot + 1);
    };
    std::map<std::string, int> uses;
    for (const auto& c : result_columns) ++uses[bare(c.name)];
    std::vector<Column> out;
    for (const auto& c : result_columns) {
        std::string name = bare(c.name);
        if (uses[name] > 1) {
            name = c.name;
            std::replace(name.begin(), name.end(), '.', '_');
        }
        out.push_back({name, c.type});
    }
    return out;
}

namespace {

SourceDefinition as_source(const TargetStore& store, const std::string& id) {
    return SourceDefinition{id, store.adapter, store.url, store.username, store.password, std::nullopt};
}

ResultTable evaluate_view(const SourceDefinition& warehouse, const ViewDef& view, const ExecutionOptions& execution) {
    LocalFederation fed({warehouse}, execution);
    ResultTable r = fed.query(view.query);
    r.columns = mart_columns(r.columns);
    return r;
}

}  // namespace

MaterializeResult materialize_view(const SourceDefinition& warehouse, const ViewDef& view, const TargetStore& mart,
                                   const fs::path& stage_dir, const ExecutionOptions& execution) {
    const auto start = Clock::now();
    const ResultTable rows = evaluate_view(warehouse, view, execution);
    std::error_code ec;
    fs::create_directories(stage_dir, ec);
    StageFile stage = write_stage(stage_dir / (view.name + ".stage"), view.name, rows);
    PhaseTiming extract{Phase::Extract, elapsed_ms(start), stage.row_count, stage.byte_size};
    ensure_table(mart, TableSchema{view.name, rows.columns});
    LoadResult loaded = load(stage, mart, view.name);
    return {std::move(stage), extract, loaded.timing};
}

JobReport run_job(const EtlJob& job, const std::vector<SourceDefinition>& sources, const TargetStore& warehouse,
                  const std::string& warehouse_id, const TargetStore* mart, const JobOptions& options) {
    JobReport report;
    if (!job.mappings.empty()) {
        // Reject a bad mapping before any table is touched.
        LocalFederation fed(sources);
        for (const auto& m : job.mappings) validate_mapping(m, fed.dictionary());
    }
    for (const auto& m : job.mappings) {
        ensure_table(warehouse, mapping_schema(m));
        if (options.direct) {
            auto start = Clock::now();
            ResultTable rows = extract_rows(sources, m, options.execution);
            report.steps.push_back({m.target_table, {Phase::Extract, elapsed_ms(start), rows.rows.size(), 0}});
            start = Clock::now();
            {
                OpenTarget t(warehouse);
                append_checked(t, m.target_table, FixtureTable{m.target_table, rows.columns, std::move(rows.rows)});
            }
            report.steps.push_back({m.target_table, {Phase::Load, elapsed_ms(start), report.steps.back().timing.rows, 0}});
        } else {
            ExtractResult ex = extract_transform(sources, m, options.stage_dir, options.execution);
            report.steps.push_back({m.target_table, ex.timing});
            LoadResult ld = load(ex.stage, warehouse, m.target_table);
            report.steps.push_back({m.target_table, ld.timing});
        }
    }
    if (!job.views.empty()) {
        if (!mart) throw Error(ErrorCode::InvalidArgument, "job defines views but no mart target was given");
        const SourceDefinition wh = as_source(warehouse, warehouse_id);
        for (const auto& v : job.views) {
            if (options.direct) {
                auto start = Clock::now();
                ResultTable rows = evaluate_view(wh, v, options.execution);
                report.steps.push_back({v.name, {Phase::Extract, elapsed_ms(start), rows.rows.size(), 0}});
                start = Clock::now();
                ensure_table(*mart, TableSchema{v.name, rows.columns});
                {
                    OpenTarget t(*mart);
                    append_checked(t, v.name, FixtureTable{v.name, rows.columns, std::move(rows.rows)});
                }
                report.steps.push_back({v.name, {Phase::Load, elapsed_ms(start), report.steps.back().timing.rows, 0}});
            } else {
                MaterializeResult r = materialize_view(wh, v, *mart, options.stage_dir, options.execution);
                report.steps.push_back({v.name, r.extract});
                report.steps.push_back({v.name, r.load});
            }
        }
    }
    return report;
}

std::string timings_csv(const std::vector<PhaseTiming>& timings) {
    std::string out = "phase,rows,bytes,duration_ms\r\n";
    for (const auto& t : timings) {
        char ms[32];
        auto [p, ec] = std::to_chars(ms, ms + sizeof(ms), t.duration_ms, std::chars_format::fixed, 3);
        out += std::string(phase_name(t.phase)) + "," + std::to_string(t.rows) + "," + std::to_string(t.bytes) + "," +
               std::string(ms, p) + "\r\n";
    }
    return out;
}

}  // namespace fedsql
