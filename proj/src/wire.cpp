// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/wire.hpp"

#include <json.hpp>

namespace fedsql::wire {

using Json = nlohmann::ordered_json;

namespace {

std::string dump(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

Json parse(std::string_view body, ErrorCode failure) {
    try {
        return Json::parse(body.begin(), body.end());
    } catch (const Json::parse_error& e) {
        throw Error(failure, std::string("invalid JSON: ") + e.what());
    }
}

const Json& member(const Json& obj, const char* key, ErrorCode failure) {
    if (!obj.is_object()) throw Error(failure, "expected a JSON object");
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(failure, std::string("missing field '") + key + "'");
    return *it;
}

std::string string_member(const Json& obj, const char* key, ErrorCode failure) {
    const Json& v = member(obj, key, failure);
    if (!v.is_string()) throw Error(failure, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const Json& obj, const char* key, ErrorCode failure) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(failure, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::vector<std::string> string_list(const Json& v, const char* key, ErrorCode failure) {
    if (!v.is_array()) throw Error(failure, std::string("field '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) throw Error(failure, std::string("field '") + key + "' must hold strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

Json encode_cell(const Value& v) {
    switch (v.index()) {
        case 1: return std::get<std::int64_t>(v);
        case 2: return std::get<double>(v);
        case 3: return std::get<std::string>(v);
        case 4: return format_timestamp(std::get<Timestamp>(v));
    }
    return nullptr;
}

Value decode_cell(const Json& j, DataType type) {
    if (j.is_null()) return Value{};
    switch (type) {
        case DataType::Integer:
            if (j.is_number_integer()) return Value{j.get<std::int64_t>()};
            break;
        case DataType::Real:
            if (j.is_number()) return Value{j.get<double>()};
            break;
        case DataType::Text:
            if (j.is_string()) return Value{j.get<std::string>()};
            break;
        case DataType::Timestamp:
            if (j.is_string()) {
                if (auto ts = parse_timestamp(j.get<std::string>())) return Value{*ts};
            }
            break;
    }
    throw Error(ErrorCode::DecodeError, "cell " + j.dump() + " is not a valid " + std::string(data_type_name(type)));
}

}  // namespace

std::string encode_query_request(const QueryRequest& req) {
    Json j;
    j["sql"] = req.sql;
    j["no_forward"] = req.no_forward;
    return dump(j);
}

QueryRequest decode_query_request(std::string_view body) {
    const auto fail = ErrorCode::MalformedRequest;
    Json j = parse(body, fail);
    QueryRequest req;
    req.sql = string_member(j, "sql", fail);
    if (auto it = j.find("no_forward"); it != j.end()) {
        if (!it->is_boolean()) throw Error(fail, "field 'no_forward' must be a boolean");
        req.no_forward = it->get<bool>();
    }
    return req;
}

std::string encode_result(const ResultTable& table) {
    Json j;
    Json cols = Json::array();
    for (const auto& c : table.columns) {
        Json col;
        col["name"] = c.name;
        col["type"] = std::string(data_type_name(c.type));
        cols.push_back(std::move(col));
    }
    j["columns"] = std::move(cols);
    Json rows = Json::array();
    for (const auto& row : table.rows) {
        Json r = Json::array();
        for (const auto& cell : row) r.push_back(encode_cell(cell));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return dump(j);
}

ResultTable decode_result(std::string_view body) {
    const auto fail = ErrorCode::DecodeError;
    Json j = parse(body, fail);
    ResultTable out;
    const Json& cols = member(j, "columns", fail);
    if (!cols.is_array()) throw Error(fail, "'columns' must be an array");
    for (const auto& c : cols) {
        auto type = data_type_from_name(string_member(c, "type", fail));
        if (!type) throw Error(fail, "unknown column type in result");
        out.columns.push_back({string_member(c, "name", fail), *type});
    }
    const Json& rows = member(j, "rows", fail);
    if (!rows.is_array()) throw Error(fail, "'rows' must be an array");
    out.rows.reserve(rows.size());
    for (const auto& r : rows) {
        if (!r.is_array() || r.size() != out.columns.size()) throw Error(fail, "row arity does not match columns");
        Row row;
        row.reserve(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) row.push_back(decode_cell(r[i], out.columns[i].type));
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string encode_error(const Error& error) {
    Json inner;
    inner["code"] = std::string(error_code_name(error.code()));
    if (error.offset()) inner["offset"] = *error.offset();
    if (!error.remote_code().empty()) inner["remote_code"] = error.remote_code();
    if (!error.target().empty()) inner["target"] = error.target();
    Json j;
    j["error"] = std::move(inner);
    j["message"] = error.what();
    return dump(j);
}

bool is_error_body(std::string_view body) {
    try {
        Json j = Json::parse(body.begin(), body.end());
        return j.is_object() && j.contains("error") && j["error"].is_object();
    } catch (const Json::parse_error&) {
        return false;
    }
}

Error decode_error(std::string_view body) {
    const auto fail = ErrorCode::DecodeError;
    Json j = parse(body, fail);
    const Json& inner = member(j, "error", fail);
    const std::string code_name = string_member(inner, "code", fail);
    const ErrorCode code = error_code_from_name(code_name).value_or(ErrorCode::Internal);
    std::string message;
    if (auto it = j.find("message"); it != j.end() && it->is_string()) message = it->get<std::string>();
    Error err(code, message);
    if (auto it = inner.find("offset"); it != inner.end() && it->is_number_unsigned()) err.with_offset(it->get<std::size_t>());
    if (auto rc = optional_string(inner, "remote_code", fail)) err.with_remote_code(*rc);
    if (auto t = optional_string(inner, "target", fail)) err.with_target(*t);
    return err;
}

std::string encode_register_request(const RegisterRequest& req) {
    Json j;
    if (req.spec_url) j["spec_url"] = *req.spec_url;
    if (req.spec_inline) j["spec_inline"] = *req.spec_inline;
    j["driver"] = req.driver;
    j["url"] = req.url;
    j["username"] = req.username;
    j["password"] = req.password;
    return dump(j);
}

RegisterRequest decode_register_request(std::string_view body) {
    const auto fail = ErrorCode::MalformedRequest;
    Json j = parse(body, fail);
    if (!j.is_object()) throw Error(fail, "expected a JSON object");
    RegisterRequest req;
    req.spec_url = optional_string(j, "spec_url", fail);
    req.spec_inline = optional_string(j, "spec_inline", fail);
    if (req.spec_url.has_value() == req.spec_inline.has_value()) {
        throw Error(fail, "exactly one of 'spec_url' and 'spec_inline' is required");
    }
    req.driver = string_member(j, "driver", fail);
    req.url = string_member(j, "url", fail);
    req.username = optional_string(j, "username", fail).value_or("");
    req.password = optional_string(j, "password", fail).value_or("");
    return req;
}

std::string encode_register_response(const std::string& source_id) {
    Json j;
    j["source_id"] = source_id;
    return dump(j);
}

std::string decode_register_response(std::string_view body) {
    return string_member(parse(body, ErrorCode::DecodeError), "source_id", ErrorCode::DecodeError);
}

std::string encode_refresh_response(const std::vector<std::string>& changed) {
    Json j;
    j["changed"] = changed;
    return dump(j);
}

std::vector<std::string> decode_refresh_response(std::string_view body) {
    const auto fail = ErrorCode::DecodeError;
    Json j = parse(body, fail);
    return string_list(member(j, "changed", fail), "changed", fail);
}

std::string encode_publish_request(const PublishRequest& req) {
    Json j;
    j["server"] = req.server;
    j["tables"] = req.tables;
    return dump(j);
}

PublishRequest decode_publish_request(std::string_view body) {
    const auto fail = ErrorCode::MalformedRequest;
    Json j = parse(body, fail);
    PublishRequest req;
    req.server = string_member(j, "server", fail);
    req.tables = string_list(member(j, "tables", fail), "tables", fail);
    return req;
}

std::string encode_ack(std::size_t count) {
    Json j;
    j["ack"] = count;
    return dump(j);
}

std::size_t decode_ack(std::string_view body) {
    const auto fail = ErrorCode::DecodeError;
    Json j = parse(body, fail);
    const Json& ack = member(j, "ack", fail);
    if (!ack.is_number_unsigned()) throw Error(fail, "'ack' must be a non-negative integer");
    return ack.get<std::size_t>();
}

std::string encode_lookup_response(const std::vector<std::string>& servers) {
    Json j;
    j["servers"] = servers;
    return dump(j);
}

std::vector<std::string> decode_lookup_response(std::string_view body) {
    const auto fail = ErrorCode::DecodeError;
    Json j = parse(body, fail);
    return string_list(member(j, "servers", fail), "servers", fail);
}

std::string encode_schema(const SchemaSnapshot& schema) {
    Json j;
    j["upper"] = schema.upper;
    Json lowers = Json::object();
    for (const auto& [id, doc] : schema.lowers) lowers[id] = doc;
    j["lowers"] = std::move(lowers);
    return dump(j);
}

SchemaSnapshot decode_schema(std::string_view body) {
    const auto fail = ErrorCode::DecodeError;
    Json j = parse(body, fail);
    SchemaSnapshot out;
    out.upper = string_member(j, "upper", fail);
    const Json& lowers = member(j, "lowers", fail);
    if (!lowers.is_object()) throw Error(fail, "'lowers' must be an object");
    for (auto it = lowers.begin(); it != lowers.end(); ++it) {
        if (!it.value().is_string()) throw Error(fail, "lower specs must be strings");
        out.lowers[it.key()] = it.value().get<std::string>();
    }
    return out;
}

std::string encode_health() { return R"({"ok":true})"; }

}  // namespace fedsql::wire
