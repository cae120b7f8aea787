// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/value.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace fedsql {

std::string_view data_type_name(DataType type) {
    switch (type) {
        case DataType::Integer: return "integer";
        case DataType::Real: return "real";
        case DataType::Text: return "text";
        case DataType::Timestamp: return "timestamp";
    }
    return "text";
}

std::optional<DataType> data_type_from_name(std::string_view name) {
    if (name == "integer") return DataType::Integer;
    if (name == "real") return DataType::Real;
    if (name == "text") return DataType::Text;
    if (name == "timestamp") return DataType::Timestamp;
    return std::nullopt;
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const sys_seconds tp{seconds{ts.seconds}};
    const auto day = floor<days>(tp);
    const year_month_day ymd{day};
    const hh_mm_ss hms{tp - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

namespace {

bool parse_fixed(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) return false;
    const char* first = text.data() + pos;
    const char* last = first + len;
    for (const char* p = first; p != last; ++p) {
        if (*p < '0' || *p > '9') return false;
    }
    return std::from_chars(first, last, out).ec == std::errc{};
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (text.size() != 10 && text.size() != 19) return std::nullopt;
    if (!parse_fixed(text, 0, 4, y) || text[4] != '-' || !parse_fixed(text, 5, 2, mo) ||
        text[7] != '-' || !parse_fixed(text, 8, 2, d)) {
        return std::nullopt;
    }
    if (text.size() == 19) {
        if ((text[10] != 'T' && text[10] != ' ') || !parse_fixed(text, 11, 2, h) || text[13] != ':' ||
            !parse_fixed(text, 14, 2, mi) || text[16] != ':' || !parse_fixed(text, 17, 2, s)) {
            return std::nullopt;
        }
        if (h > 23 || mi > 59 || s > 59) return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
    return Timestamp{tp.time_since_epoch().count()};
}

bool value_fits(const Value& v, DataType type) {
    switch (v.index()) {
        case 0: return true;
        case 1: return type == DataType::Integer || type == DataType::Real;
        case 2: return type == DataType::Real;
        case 3: return type == DataType::Text;
        case 4: return type == DataType::Timestamp;
    }
    return false;
}

bool types_comparable(DataType a, DataType b) {
    auto numeric = [](DataType t) { return t == DataType::Integer || t == DataType::Real; };
    return a == b || (numeric(a) && numeric(b));
}

namespace {

std::strong_ordering compare_doubles(double a, double b) {
    // NaN sorts above every number so the order stays total.
    const bool an = std::isnan(a), bn = std::isnan(b);
    if (an || bn) return an == bn ? std::strong_ordering::equal
                                  : (an ? std::strong_ordering::greater : std::strong_ordering::less);
    if (a < b) return std::strong_ordering::less;
    if (a > b) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::optional<std::strong_ordering> compare_numeric(const Value& a, const Value& b) {
    const auto* ai = std::get_if<std::int64_t>(&a);
    const auto* bi = std::get_if<std::int64_t>(&b);
    if (ai && bi) return *ai <=> *bi;
    const double ad = ai ? static_cast<double>(*ai) : std::get<double>(a);
    const double bd = bi ? static_cast<double>(*bi) : std::get<double>(b);
    return compare_doubles(ad, bd);
}

int kind_rank(const Value& v) {
    switch (v.index()) {
        case 1:
        case 2: return 0;
        case 3: return 1;
        case 4: return 2;
        default: return 3;
    }
}

}  // namespace

std::optional<std::strong_ordering> compare_values(const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return std::nullopt;
    const int ka = kind_rank(a), kb = kind_rank(b);
    if (ka != kb) return std::nullopt;
    switch (ka) {
        case 0: return compare_numeric(a, b);
        case 1: return std::get<std::string>(a).compare(std::get<std::string>(b)) <=> 0;
        case 2: return std::get<Timestamp>(a) <=> std::get<Timestamp>(b);
    }
    return std::nullopt;
}

std::strong_ordering canonical_compare(const Value& a, const Value& b) {
    const int ka = kind_rank(a), kb = kind_rank(b);
    if (ka != kb) return ka <=> kb;
    if (ka == 3) return std::strong_ordering::equal;
    auto c = *compare_values(a, b);
    if (c == 0 && ka == 0) return a.index() <=> b.index();
    return c;
}

std::string_view op_symbol(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "=";
}

bool evaluate(CompareOp op, const Value& a, const Value& b) {
    const auto c = compare_values(a, b);
    if (!c) return false;
    switch (op) {
        case CompareOp::Eq: return *c == 0;
        case CompareOp::Ne: return *c != 0;
        case CompareOp::Lt: return *c < 0;
        case CompareOp::Le: return *c <= 0;
        case CompareOp::Gt: return *c > 0;
        case CompareOp::Ge: return *c >= 0;
    }
    return false;
}

std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string out(buf, res.ptr);
    // Keep a fraction marker so reals stay reals when re-read as SQL literals.
    if (std::isfinite(v) && out.find_first_of(".e") == std::string::npos) out += ".0";
    return out;
}

std::string value_to_text(const Value& v) {
    switch (v.index()) {
        case 1: return std::to_string(std::get<std::int64_t>(v));
        case 2: return format_real(std::get<double>(v));
        case 3: return std::get<std::string>(v);
        case 4: return format_timestamp(std::get<Timestamp>(v));
    }
    return {};
}

std::optional<Value> parse_value(std::string_view text, DataType type) {
    switch (type) {
        case DataType::Integer: {
            std::int64_t out = 0;
            auto res = std::from_chars(text.data(), text.data() + text.size(), out);
            if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty()) return std::nullopt;
            return Value{out};
        }
        case DataType::Real: {
            double out = 0;
            auto res = std::from_chars(text.data(), text.data() + text.size(), out);
            if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty()) return std::nullopt;
            return Value{out};
        }
        case DataType::Text: return Value{std::string(text)};
        case DataType::Timestamp: {
            auto ts = parse_timestamp(text);
            if (!ts) return std::nullopt;
            return Value{*ts};
        }
    }
    return std::nullopt;
}

}  // namespace fedsql
