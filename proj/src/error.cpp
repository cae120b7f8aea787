// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/error.hpp"

#include <array>
#include <utility>

namespace fedsql {

namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 28> kNames{{
    {ErrorCode::Internal, "Internal"},
    {ErrorCode::InvalidArgument, "InvalidArgument"},
    {ErrorCode::MalformedSpec, "MalformedSpec"},
    {ErrorCode::DuplicateName, "DuplicateName"},
    {ErrorCode::DanglingRelationship, "DanglingRelationship"},
    {ErrorCode::DuplicateSourceId, "DuplicateSourceId"},
    {ErrorCode::UnresolvableRef, "UnresolvableRef"},
    {ErrorCode::LogicalNameCollision, "LogicalNameCollision"},
    {ErrorCode::SyntaxError, "SyntaxError"},
    {ErrorCode::UnsupportedFeature, "UnsupportedFeature"},
    {ErrorCode::UnknownColumn, "UnknownColumn"},
    {ErrorCode::UnknownTable, "UnknownTable"},
    {ErrorCode::TypeMismatch, "TypeMismatch"},
    {ErrorCode::AmbiguousColumn, "AmbiguousColumn"},
    {ErrorCode::CrossProductRejected, "CrossProductRejected"},
    {ErrorCode::BackendUnavailable, "BackendUnavailable"},
    {ErrorCode::ResultTooLarge, "ResultTooLarge"},
    {ErrorCode::MalformedFixture, "MalformedFixture"},
    {ErrorCode::RemoteError, "RemoteError"},
    {ErrorCode::RemoteTimeout, "RemoteTimeout"},
    {ErrorCode::DecodeError, "DecodeError"},
    {ErrorCode::MalformedRequest, "MalformedRequest"},
    {ErrorCode::MalformedUrl, "MalformedUrl"},
    {ErrorCode::AddressInUse, "AddressInUse"},
    {ErrorCode::Shutdown, "Shutdown"},
    {ErrorCode::StageWriteFailed, "StageWriteFailed"},
    {ErrorCode::MalformedStage, "MalformedStage"},
    {ErrorCode::ScenarioUnavailable, "ScenarioUnavailable"},
}};

}  // namespace

std::string_view error_code_name(ErrorCode code) {
    for (const auto& [c, name] : kNames) {
        if (c == code) return name;
    }
    return "Internal";
}

std::optional<ErrorCode> error_code_from_name(std::string_view name) {
    for (const auto& [c, n] : kNames) {
        if (n == name) return c;
    }
    return std::nullopt;
}

int http_status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::RemoteError:
        case ErrorCode::RemoteTimeout:
        case ErrorCode::DecodeError:
            return 502;
        case ErrorCode::BackendUnavailable:
        case ErrorCode::Shutdown:
            return 503;
        case ErrorCode::Internal:
        case ErrorCode::StageWriteFailed:
            return 500;
        default:
            return 400;
    }
}

}  // namespace fedsql
