// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fedsql {

/// Every failure the middleware can report. The enumerator names double as
/// the wire error codes, so renaming one is a protocol change.
enum class ErrorCode {
    Internal,
    InvalidArgument,
    // catalog
    MalformedSpec,
    DuplicateName,
    DanglingRelationship,
    DuplicateSourceId,
    UnresolvableRef,
    LogicalNameCollision,
    // sql front end
    SyntaxError,
    UnsupportedFeature,
    UnknownColumn,
    UnknownTable,
    TypeMismatch,
    AmbiguousColumn,
    // planning / execution
    CrossProductRejected,
    BackendUnavailable,
    ResultTooLarge,
    MalformedFixture,
    // wire / peers
    RemoteError,
    RemoteTimeout,
    DecodeError,
    MalformedRequest,
    MalformedUrl,
    // service lifecycle
    AddressInUse,
    Shutdown,
    // etl / tools
    StageWriteFailed,
    MalformedStage,
    ScenarioUnavailable,
};

std::string_view error_code_name(ErrorCode code);
std::optional<ErrorCode> error_code_from_name(std::string_view name);

/// HTTP status used when the error crosses the wire.
int http_status_for(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// 1-based character offset, set for SyntaxError.
    std::optional<std::size_t> offset() const noexcept { return offset_; }
    Error& with_offset(std::size_t offset) {
        offset_ = offset;
        return *this;
    }

    /// Code reported by a peer, set for RemoteError.
    const std::string& remote_code() const noexcept { return remote_code_; }
    Error& with_remote_code(std::string code) {
        remote_code_ = std::move(code);
        return *this;
    }

    /// Failing target (source id or URL) for BackendUnavailable / RemoteError.
    const std::string& target() const noexcept { return target_; }
    Error& with_target(std::string target) {
        target_ = std::move(target);
        return *this;
    }

private:
    ErrorCode code_;
    std::optional<std::size_t> offset_;
    std::string remote_code_;
    std::string target_;
};

}  // namespace fedsql
