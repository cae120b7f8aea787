// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/catalog.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cctype>
#include <set>
#include <sstream>

#include "fedsql/backend.hpp"
#include "fedsql/error.hpp"

namespace fedsql {

namespace pt = boost::property_tree;

bool is_identifier(std::string_view name) {
    return !name.empty() &&
           std::none_of(name.begin(), name.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

const ColumnSpec* TableSpec::find_column(std::string_view logical) const {
    for (const auto& c : columns) {
        if (c.logical_name == logical) return &c;
    }
    return nullptr;
}

const TableSpec* LowerSpec::find_table(std::string_view logical) const {
    for (const auto& t : tables) {
        if (t.logical_name == logical) return &t;
    }
    return nullptr;
}

void LowerSpec::validate() const {
    if (!is_identifier(database_logical_name)) {
        throw Error(ErrorCode::MalformedSpec, "database name must be a non-empty identifier");
    }
    std::set<std::string> logical_tables, physical_tables;
    for (const auto& t : tables) {
        if (!is_identifier(t.logical_name) || !is_identifier(t.physical_name)) {
            throw Error(ErrorCode::MalformedSpec, "table names must be non-empty identifiers");
        }
        if (!logical_tables.insert(t.logical_name).second) {
            throw Error(ErrorCode::DuplicateName, "duplicate logical table name '" + t.logical_name + "'");
        }
        if (!physical_tables.insert(t.physical_name).second) {
            throw Error(ErrorCode::DuplicateName, "duplicate physical table name '" + t.physical_name + "'");
        }
        if (t.columns.empty()) {
            throw Error(ErrorCode::MalformedSpec, "table '" + t.logical_name + "' has no columns");
        }
        std::set<std::string> logical_cols, physical_cols;
        for (const auto& c : t.columns) {
            if (!is_identifier(c.logical_name) || !is_identifier(c.physical_name)) {
                throw Error(ErrorCode::MalformedSpec, "column names must be non-empty identifiers");
            }
            if (!logical_cols.insert(c.logical_name).second) {
                throw Error(ErrorCode::DuplicateName,
                            "duplicate logical column '" + c.logical_name + "' in table '" + t.logical_name + "'");
            }
            if (!physical_cols.insert(c.physical_name).second) {
                throw Error(ErrorCode::DuplicateName,
                            "duplicate physical column '" + c.physical_name + "' in table '" + t.logical_name + "'");
            }
        }
        for (const auto& k : t.key_columns) {
            if (!logical_cols.count(k)) {
                throw Error(ErrorCode::MalformedSpec,
                            "key column '" + k + "' is not a column of table '" + t.logical_name + "'");
            }
        }
    }
    for (const auto& r : relationships) {
        if (r.from_columns.empty() || r.from_columns.size() != r.to_columns.size()) {
            throw Error(ErrorCode::MalformedSpec, "relationship column lists must be non-empty and of equal length");
        }
        const TableSpec* from = find_table(r.from_table);
        const TableSpec* to = find_table(r.to_table);
        if (!from || !to) {
            throw Error(ErrorCode::DanglingRelationship,
                        "relationship " + r.from_table + " -> " + r.to_table + " names an unknown table");
        }
        for (const auto& c : r.from_columns) {
            if (!from->find_column(c)) {
                throw Error(ErrorCode::DanglingRelationship, "relationship column '" + r.from_table + "." + c + "' is unknown");
            }
        }
        for (const auto& c : r.to_columns) {
            if (!to->find_column(c)) {
                throw Error(ErrorCode::DanglingRelationship, "relationship column '" + r.to_table + "." + c + "' is unknown");
            }
        }
    }
}

const UpperSpecEntry* UpperSpec::find(std::string_view source_id) const {
    for (const auto& e : entries) {
        if (e.source_id == source_id) return &e;
    }
    return nullptr;
}

const TableBinding* DataDictionary::find_table(std::string_view logical) const {
    auto it = tables.find(std::string(logical));
    return it == tables.end() ? nullptr : &it->second;
}

const ColumnBinding* DataDictionary::find_column(const std::string& table, const std::string& column) const {
    auto it = columns.find({table, column});
    return it == columns.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// XML reading

namespace {

pt::ptree read_document(std::string_view document) {
    std::istringstream in{std::string(document)};
    pt::ptree tree;
    try {
        pt::read_xml(in, tree, pt::xml_parser::no_comments);
    } catch (const pt::xml_parser_error& e) {
        throw Error(ErrorCode::MalformedSpec, std::string("xml: ") + e.what());
    }
    return tree;
}

class Element {
public:
    Element(std::string name, const pt::ptree& node) : name_(std::move(name)), node_(node) {}

    const std::string& name() const { return name_; }

    std::string attr(const char* key) const {
        auto value = node_.get_optional<std::string>(std::string("<xmlattr>.") + key);
        if (!value) throw Error(ErrorCode::MalformedSpec, "<" + name_ + "> is missing attribute '" + key + "'");
        return *value;
    }

    std::vector<Element> children() const {
        std::vector<Element> out;
        for (const auto& [key, child] : node_) {
            if (key == "<xmlattr>" || key == "<xmlcomment>") continue;
            out.emplace_back(key, child);
        }
        return out;
    }

    void expect_no_text() const {
        const auto& text = node_.data();
        if (std::any_of(text.begin(), text.end(), [](unsigned char c) { return !std::isspace(c); })) {
            throw Error(ErrorCode::MalformedSpec, "<" + name_ + "> must not contain text");
        }
    }

private:
    std::string name_;
    const pt::ptree& node_;
};

Element root_element(const pt::ptree& tree, const char* expected) {
    Element doc("", tree);
    auto roots = doc.children();
    if (roots.size() != 1 || roots[0].name() != expected) {
        throw Error(ErrorCode::MalformedSpec, std::string("expected a single <") + expected + "> root element");
    }
    if (roots[0].attr("version") != "1") {
        throw Error(ErrorCode::MalformedSpec, "unsupported spec version '" + roots[0].attr("version") + "'");
    }
    return roots[0];
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    if (text.empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto comma = text.find(',', start);
        out.push_back(text.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_bool(const std::string& text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw Error(ErrorCode::MalformedSpec, "expected true|false, got '" + text + "'");
}

ColumnSpec read_column(const Element& e) {
    ColumnSpec c;
    c.physical_name = e.attr("name");
    c.logical_name = e.attr("logical");
    auto type = data_type_from_name(e.attr("type"));
    if (!type) throw Error(ErrorCode::MalformedSpec, "unknown column type '" + e.attr("type") + "'");
    c.type = *type;
    c.nullable = parse_bool(e.attr("nullable"));
    if (!e.children().empty()) throw Error(ErrorCode::MalformedSpec, "<column> must be empty");
    return c;
}

TableSpec read_table(const Element& e) {
    TableSpec t;
    t.physical_name = e.attr("name");
    t.logical_name = e.attr("logical");
    e.expect_no_text();
    bool seen_key = false;
    for (const auto& child : e.children()) {
        if (child.name() == "column") {
            if (seen_key) throw Error(ErrorCode::MalformedSpec, "<key> must follow all <column> elements");
            t.columns.push_back(read_column(child));
        } else if (child.name() == "key") {
            if (seen_key) throw Error(ErrorCode::MalformedSpec, "table '" + t.logical_name + "' has two <key> elements");
            seen_key = true;
            t.key_columns = split_list(child.attr("columns"));
        } else {
            throw Error(ErrorCode::MalformedSpec, "unexpected <" + child.name() + "> inside <table>");
        }
    }
    return t;
}

}  // namespace

LowerSpec parse_lower_spec(std::string_view document) {
    auto tree = read_document(document);
    auto root = root_element(tree, "xspec");
    auto databases = root.children();
    if (databases.size() != 1 || databases[0].name() != "database") {
        throw Error(ErrorCode::MalformedSpec, "<xspec> must contain exactly one <database>");
    }
    const auto& db = databases[0];
    db.expect_no_text();
    LowerSpec spec;
    spec.database_logical_name = db.attr("name");
    for (const auto& child : db.children()) {
        if (child.name() == "table") {
            if (!spec.relationships.empty()) {
                throw Error(ErrorCode::MalformedSpec, "<relationship> elements must follow all <table> elements");
            }
            spec.tables.push_back(read_table(child));
        } else if (child.name() == "relationship") {
            RelationshipSpec r;
            r.from_table = child.attr("fromTable");
            r.from_columns = split_list(child.attr("fromColumns"));
            r.to_table = child.attr("toTable");
            r.to_columns = split_list(child.attr("toColumns"));
            spec.relationships.push_back(std::move(r));
        } else {
            throw Error(ErrorCode::MalformedSpec, "unexpected <" + child.name() + "> inside <database>");
        }
    }
    spec.validate();
    return spec;
}

std::pair<UpperSpec, LowerSpecMap> parse_upper_spec(std::string_view document, const SpecResolver& resolver) {
    auto tree = read_document(document);
    auto root = root_element(tree, "xspec-federation");
    UpperSpec upper;
    LowerSpecMap lowers;
    for (const auto& child : root.children()) {
        if (child.name() != "source") {
            throw Error(ErrorCode::MalformedSpec, "unexpected <" + child.name() + "> inside <xspec-federation>");
        }
        UpperSpecEntry entry{child.attr("id"), child.attr("url"), child.attr("driver"), child.attr("spec")};
        if (entry.source_id.empty() || entry.url.empty() || entry.driver_name.empty() || entry.lower_spec_ref.empty()) {
            throw Error(ErrorCode::MalformedSpec, "<source> attributes must be non-empty");
        }
        if (upper.find(entry.source_id)) {
            throw Error(ErrorCode::DuplicateSourceId, "duplicate source id '" + entry.source_id + "'");
        }
        auto bytes = resolver ? resolver(entry.lower_spec_ref) : std::nullopt;
        if (!bytes) {
            throw Error(ErrorCode::UnresolvableRef, "cannot resolve lower spec '" + entry.lower_spec_ref + "'");
        }
        lowers.emplace(entry.source_id, parse_lower_spec(*bytes));
        upper.entries.push_back(std::move(entry));
    }
    return {std::move(upper), std::move(lowers)};
}

// ---------------------------------------------------------------------------
// XML writing

namespace {

std::string escape_attr(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += items[i];
    }
    return out;
}

}  // namespace

std::string serialize_lower_spec(const LowerSpec& spec) {
    std::string out = "<xspec version=\"1\">\n";
    out += "  <database name=\"" + escape_attr(spec.database_logical_name) + "\">\n";
    for (const auto& t : spec.tables) {
        out += "    <table name=\"" + escape_attr(t.physical_name) + "\" logical=\"" + escape_attr(t.logical_name) + "\">\n";
        for (const auto& c : t.columns) {
            out += "      <column name=\"" + escape_attr(c.physical_name) + "\" logical=\"" +
                   escape_attr(c.logical_name) + "\" type=\"" + std::string(data_type_name(c.type)) +
                   "\" nullable=\"" + (c.nullable ? "true" : "false") + "\"/>\n";
        }
        if (!t.key_columns.empty()) {
            out += "      <key columns=\"" + escape_attr(join_list(t.key_columns)) + "\"/>\n";
        }
        out += "    </table>\n";
    }
    for (const auto& r : spec.relationships) {
        out += "    <relationship fromTable=\"" + escape_attr(r.from_table) + "\" fromColumns=\"" +
               escape_attr(join_list(r.from_columns)) + "\" toTable=\"" + escape_attr(r.to_table) +
               "\" toColumns=\"" + escape_attr(join_list(r.to_columns)) + "\"/>\n";
    }
    out += "  </database>\n</xspec>\n";
    return out;
}

std::string serialize_upper_spec(const UpperSpec& spec) {
    std::string out = "<xspec-federation version=\"1\">\n";
    for (const auto& e : spec.entries) {
        out += "  <source id=\"" + escape_attr(e.source_id) + "\" url=\"" + escape_attr(e.url) + "\" driver=\"" +
               escape_attr(e.driver_name) + "\" spec=\"" + escape_attr(e.lower_spec_ref) + "\"/>\n";
    }
    out += "</xspec-federation>\n";
    return out;
}

// ---------------------------------------------------------------------------

LowerSpec introspect(BackendAdapter& backend, Handle handle, const std::string& database_logical_name) {
    LowerSpec spec;
    spec.database_logical_name = database_logical_name;
    for (const auto& t : backend.describe(handle)) {
        TableSpec table;
        table.physical_name = t.name;
        table.logical_name = t.name;
        for (const auto& c : t.columns) {
            table.columns.push_back(ColumnSpec{c.name, c.name, c.type, true});
        }
        spec.tables.push_back(std::move(table));
    }
    return spec;
}

LowerSpec carry_logical_names(const LowerSpec& introspected, const LowerSpec& previous) {
    LowerSpec out = introspected;
    out.database_logical_name = previous.database_logical_name;
    std::set<std::string> used;
    for (auto& t : out.tables) {
        auto prev = std::find_if(previous.tables.begin(), previous.tables.end(),
                                 [&](const TableSpec& p) { return p.physical_name == t.physical_name; });
        if (prev == previous.tables.end()) continue;
        t.logical_name = prev->logical_name;
        for (auto& c : t.columns) {
            auto pc = std::find_if(prev->columns.begin(), prev->columns.end(),
                                   [&](const ColumnSpec& p) { return p.physical_name == c.physical_name; });
            if (pc == prev->columns.end()) continue;
            c.logical_name = pc->logical_name;
            c.nullable = pc->nullable;
        }
        for (const auto& k : prev->key_columns) {
            if (t.find_column(k)) t.key_columns.push_back(k);
        }
    }
    for (const auto& r : previous.relationships) {
        const auto* from = out.find_table(r.from_table);
        const auto* to = out.find_table(r.to_table);
        if (!from || !to) continue;
        auto all_in = [](const TableSpec* t, const std::vector<std::string>& cols) {
            return std::all_of(cols.begin(), cols.end(), [&](const std::string& c) { return t->find_column(c); });
        };
        if (all_in(from, r.from_columns) && all_in(to, r.to_columns)) out.relationships.push_back(r);
    }
    // A carried-over logical name can collide with a new table's default name.
    try {
        out.validate();
    } catch (const Error&) {
        return introspected;
    }
    return out;
}

Fingerprint fingerprint(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_md5(), nullptr) != 1) {
        throw Error(ErrorCode::Internal, "md5 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[digest[i] >> 4];
        hex += kHex[digest[i] & 0x0f];
    }
    return Fingerprint{bytes.size(), std::move(hex)};
}

bool specs_changed(const Fingerprint& old_fp, const Fingerprint& new_fp, FingerprintProbe* probe) {
    if (probe) ++probe->size_comparisons;
    if (old_fp.byte_size != new_fp.byte_size) return true;
    if (probe) ++probe->md5_comparisons;
    return old_fp.md5_hex != new_fp.md5_hex;
}

DataDictionary build_dictionary(const UpperSpec& upper, const LowerSpecMap& lowers) {
    DataDictionary dict;
    for (const auto& entry : upper.entries) {
        auto it = lowers.find(entry.source_id);
        if (it == lowers.end()) {
            throw Error(ErrorCode::UnresolvableRef, "no lower spec for source '" + entry.source_id + "'");
        }
        for (const auto& t : it->second.tables) {
            TableBinding binding{entry.source_id, t.physical_name, {}};
            for (const auto& c : t.columns) {
                binding.columns.push_back(c.logical_name);
                dict.columns[{t.logical_name, c.logical_name}] = ColumnBinding{c.physical_name, c.type};
            }
            auto [pos, inserted] = dict.tables.emplace(t.logical_name, std::move(binding));
            if (!inserted) {
                throw Error(ErrorCode::LogicalNameCollision, "logical table '" + t.logical_name +
                                                                 "' is provided by both '" + pos->second.source_id +
                                                                 "' and '" + entry.source_id + "'");
            }
        }
    }
    return dict;
}

}  // namespace fedsql
