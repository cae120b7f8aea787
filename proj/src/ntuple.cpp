// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/ntuple.hpp"

#include <random>

#include "fedsql/error.hpp"

namespace fedsql {

FixtureTable generate_ntuple(const NtupleSpec& spec, const std::string& table_name) {
    if (spec.n_events < 1 || spec.n_vars < 1) {
        throw Error(ErrorCode::InvalidArgument, "ntuple needs at least one event and one variable");
    }
    FixtureTable t;
    t.name = table_name;
    t.columns.push_back({"event_id", DataType::Integer});
    for (std::int64_t v = 0; v < spec.n_vars; ++v) t.columns.push_back({"v" + std::to_string(v), DataType::Real});

    // Top 53 bits of the engine output: portable, unlike the std distributions.
    std::mt19937_64 rng(spec.seed);
    t.rows.reserve(static_cast<std::size_t>(spec.n_events));
    for (std::int64_t e = 1; e <= spec.n_events; ++e) {
        Row row;
        row.reserve(t.columns.size());
        row.emplace_back(e);
        for (std::int64_t v = 0; v < spec.n_vars; ++v) row.emplace_back(static_cast<double>(rng() >> 11) * 0x1.0p-53);
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string generate_ntuple_fixture(const NtupleSpec& spec, const std::string& table_name) {
    const FixtureTable t = generate_ntuple(spec, table_name);
    return write_fixture(std::span<const FixtureTable>(&t, 1));
}

}  // namespace fedsql
