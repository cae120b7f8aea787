// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedsql/error.hpp"
#include "fedsql/result_table.hpp"

/// JSON bodies exchanged by federation servers, the RLS and clients. Every
/// encoder emits compact JSON with keys in a fixed order, so decode followed
/// by encode reproduces a canonical body byte for byte. Decoders accept any
/// key order and throw DecodeError (responses) or MalformedRequest (requests).
namespace fedsql::wire {

struct QueryRequest {
    std::string sql;
    bool no_forward = false;

    bool operator==(const QueryRequest&) const = default;
};

std::string encode_query_request(const QueryRequest& req);
QueryRequest decode_query_request(std::string_view body);

/// `{"columns":[{"name":..,"type":..}],"rows":[[cell,...],...]}`; nulls as
/// null, timestamps as ISO-8601 strings.
std::string encode_result(const ResultTable& table);
ResultTable decode_result(std::string_view body);

/// `{"error":{"code":"..."[,"offset":N][,"remote_code":".."][,"target":".."]},"message":"..."}`
std::string encode_error(const Error& error);
/// Reconstructs the error a peer reported.
Error decode_error(std::string_view body);
bool is_error_body(std::string_view body);

struct RegisterRequest {
    std::optional<std::string> spec_url;
    std::optional<std::string> spec_inline;
    std::string driver;
    std::string url;
    std::string username;
    std::string password;

    bool operator==(const RegisterRequest&) const = default;
};

std::string encode_register_request(const RegisterRequest& req);
RegisterRequest decode_register_request(std::string_view body);
std::string encode_register_response(const std::string& source_id);
std::string decode_register_response(std::string_view body);

std::string encode_refresh_response(const std::vector<std::string>& changed);
std::vector<std::string> decode_refresh_response(std::string_view body);

/// `/rls/publish` and `/rls/unpublish` share one body shape.
struct PublishRequest {
    std::string server;
    std::vector<std::string> tables;

    bool operator==(const PublishRequest&) const = default;
};

std::string encode_publish_request(const PublishRequest& req);
PublishRequest decode_publish_request(std::string_view body);
std::string encode_ack(std::size_t count);
std::size_t decode_ack(std::string_view body);
std::string encode_lookup_response(const std::vector<std::string>& servers);
std::vector<std::string> decode_lookup_response(std::string_view body);

struct SchemaSnapshot {
    std::string upper;
    std::map<std::string, std::string> lowers;

    bool operator==(const SchemaSnapshot&) const = default;
};

std::string encode_schema(const SchemaSnapshot& schema);
SchemaSnapshot decode_schema(std::string_view body);

std::string encode_health();

}  // namespace fedsql::wire
