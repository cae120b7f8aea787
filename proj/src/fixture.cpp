// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include <set>

#include "fedsql/backend.hpp"
#include "fedsql/error.hpp"

namespace fedsql {

void BackendAdapter::create_table(Handle, const TableSchema& schema) {
    throw Error(ErrorCode::UnsupportedFeature, driver_name() + " cannot create table '" + schema.name + "'");
}

void BackendAdapter::append_rows(Handle, const std::string& table, const std::vector<Row>&) {
    throw Error(ErrorCode::UnsupportedFeature, driver_name() + " cannot load into '" + table + "'");
}

std::string compose_select(std::span<const std::string> select_fields, std::span<const std::string> tables,
                           const std::string& where_clause) {
    std::string out = "SELECT ";
    for (std::size_t i = 0; i < select_fields.size(); ++i) {
        if (i) out += ", ";
        out += select_fields[i];
    }
    out += " FROM ";
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (i) out += ", ";
        out += tables[i];
    }
    if (!where_clause.empty()) out += " WHERE " + where_clause;
    return out;
}

namespace {

struct Field {
    std::string text;
    bool quoted = false;
};

struct Record {
    std::vector<Field> fields;
    std::size_t line = 0;
    bool blank = false;
};

[[noreturn]] void malformed(std::size_t line, const std::string& message) {
    throw Error(ErrorCode::MalformedFixture, "fixture line " + std::to_string(line) + ": " + message);
}

/// Splits the text into CSV records; quoted fields may span lines.
std::vector<Record> read_records(std::string_view text) {
    std::vector<Record> out;
    std::size_t i = 0, line = 1;
    while (i < text.size()) {
        Record rec;
        rec.line = line;
        Field field;
        bool any_char = false;
        while (true) {
            if (i >= text.size()) break;
            char c = text[i];
            if (c == '"' && field.text.empty() && !field.quoted) {
                field.quoted = true;
                any_char = true;
                ++i;
                while (true) {
                    if (i >= text.size()) malformed(rec.line, "unterminated quoted field");
                    if (text[i] == '"') {
                        if (i + 1 < text.size() && text[i + 1] == '"') {
                            field.text += '"';
                            i += 2;
                            continue;
                        }
                        ++i;
                        break;
                    }
                    if (text[i] == '\n') ++line;
                    field.text += text[i++];
                }
                if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                    malformed(line, "characters after closing quote");
                }
                continue;
            }
            if (c == ',') {
                rec.fields.push_back(std::move(field));
                field = Field{};
                any_char = true;
                ++i;
                continue;
            }
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
                continue;
            }
            if (c == '\n') {
                ++i;
                ++line;
                break;
            }
            field.text += c;
            any_char = true;
            ++i;
        }
        rec.blank = !any_char;
        rec.fields.push_back(std::move(field));
        out.push_back(std::move(rec));
    }
    return out;
}

bool is_table_header(const Record& r) {
    return r.fields.size() == 1 && !r.fields[0].quoted && r.fields[0].text.rfind("#table", 0) == 0;
}

Value parse_cell(const Field& f, const Column& col, std::size_t line, bool single_column) {
    if (!f.quoted && f.text.empty()) return Value{};
    if (f.quoted && f.text.empty() && single_column && col.type != DataType::Text) return Value{};
    auto v = parse_value(f.text, col.type);
    if (!v) {
        malformed(line, "'" + f.text + "' is not a valid " + std::string(data_type_name(col.type)) + " for column '" +
                            col.name + "'");
    }
    return *v;
}

std::string cell_text(const Value& v, DataType type, bool single_column) {
    if (is_null(v)) {
        if (!single_column) return {};
        if (type == DataType::Text) {
            throw Error(ErrorCode::MalformedFixture, "a null in a single text column cannot be written to a fixture");
        }
        return "\"\"";
    }
    if (type != DataType::Text) return value_to_text(v);
    std::string out = "\"";
    for (char c : std::get<std::string>(v)) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::vector<FixtureTable> parse_fixture(std::string_view text) {
    auto records = read_records(text);
    std::vector<FixtureTable> out;
    std::set<std::string> names;
    std::size_t i = 0;
    while (i < records.size()) {
        const Record& head = records[i];
        if (head.blank) {
            ++i;
            continue;
        }
        if (!is_table_header(head)) malformed(head.line, "expected '#table <name>'");
        FixtureTable table;
        std::string_view rest = std::string_view(head.fields[0].text).substr(6);
        while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t')) rest.remove_suffix(1);
        if (rest.empty() || rest.find_first_of(" \t,") != std::string_view::npos) {
            malformed(head.line, "bad table name");
        }
        table.name = std::string(rest);
        if (!names.insert(table.name).second) malformed(head.line, "duplicate table '" + table.name + "'");
        if (i + 2 >= records.size()) malformed(head.line, "table '" + table.name + "' lacks names and types lines");
        const Record& names_rec = records[i + 1];
        const Record& types_rec = records[i + 2];
        if (names_rec.blank || types_rec.blank) malformed(names_rec.line, "missing column names or types");
        if (names_rec.fields.size() != types_rec.fields.size()) {
            malformed(types_rec.line, "names and types lines differ in length");
        }
        std::set<std::string> col_names;
        for (std::size_t c = 0; c < names_rec.fields.size(); ++c) {
            const auto& n = names_rec.fields[c].text;
            if (n.empty() || !col_names.insert(n).second) malformed(names_rec.line, "bad or duplicate column name '" + n + "'");
            auto type = data_type_from_name(types_rec.fields[c].text);
            if (!type) malformed(types_rec.line, "unknown type '" + types_rec.fields[c].text + "'");
            table.columns.push_back({n, *type});
        }
        const bool single = table.columns.size() == 1;
        i += 3;
        while (i < records.size() && !records[i].blank && !is_table_header(records[i])) {
            const Record& r = records[i];
            if (r.fields.size() != table.columns.size()) {
                malformed(r.line, "expected " + std::to_string(table.columns.size()) + " fields, found " +
                                      std::to_string(r.fields.size()));
            }
            Row row;
            row.reserve(r.fields.size());
            for (std::size_t c = 0; c < r.fields.size(); ++c) row.push_back(parse_cell(r.fields[c], table.columns[c], r.line, single));
            table.rows.push_back(std::move(row));
            ++i;
        }
        out.push_back(std::move(table));
    }
    return out;
}

std::string write_fixture_rows(const std::vector<Column>& columns, std::span<const Row> rows) {
    std::string out;
    const bool single = columns.size() == 1;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ',';
            out += cell_text(row[c], columns[c].type, single);
        }
        out += '\n';
    }
    return out;
}

std::string write_fixture(std::span<const FixtureTable> tables) {
    std::string out;
    for (std::size_t t = 0; t < tables.size(); ++t) {
        const auto& table = tables[t];
        if (t) out += '\n';
        out += "#table " + table.name + "\n";
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out += ',';
            out += table.columns[c].name;
        }
        out += '\n';
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out += ',';
            out += data_type_name(table.columns[c].type);
        }
        out += '\n';
        out += write_fixture_rows(table.columns, table.rows);
    }
    return out;
}

}  // namespace fedsql
