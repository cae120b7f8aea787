// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "fedsql/backend.hpp"

namespace fedsql {

struct NtupleSpec {
    std::int64_t n_events = 1;
    std::int64_t n_vars = 1;
    std::uint64_t seed = 0;
};

/// Table with an integer `event_id` (1-based) followed by real columns
/// `v0..v{n_vars-1}` holding uniform values in [0,1). Output depends only on
/// `spec` and the table name. Throws InvalidArgument for non-positive sizes.
FixtureTable generate_ntuple(const NtupleSpec& spec, const std::string& table_name = "ntuple");

std::string generate_ntuple_fixture(const NtupleSpec& spec, const std::string& table_name = "ntuple");

}  // namespace fedsql
