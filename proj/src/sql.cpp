// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/sql.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <set>

#include "fedsql/error.hpp"

namespace fedsql {

namespace {

enum class Tok { Ident, Keyword, Integer, Real, String, Symbol, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;  ///< keyword uppercased; string literal unescaped
    std::size_t offset = 0;  ///< 0-based
};

constexpr std::array kSupportedKeywords{"SELECT", "FROM", "WHERE", "AND", "ORDER", "BY", "ASC", "DESC", "LIMIT", "AS"};
constexpr std::array kUnsupportedKeywords{"OR",     "NOT",    "GROUP",  "HAVING",    "JOIN",   "INNER",  "LEFT",
                                          "RIGHT",  "OUTER",  "FULL",   "CROSS",     "ON",     "UNION",  "INTERSECT",
                                          "EXCEPT", "DISTINCT", "IN",   "LIKE",      "IS",     "BETWEEN", "EXISTS",
                                          "NULL",   "INSERT", "UPDATE", "DELETE",    "CREATE", "DROP",   "CASE",
                                          "OFFSET", "WITH",   "VALUES", "ALTER"};

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

bool is_keyword(std::string_view upper_word) {
    auto eq = [&](const char* k) { return upper_word == k; };
    return std::any_of(kSupportedKeywords.begin(), kSupportedKeywords.end(), eq) ||
           std::any_of(kUnsupportedKeywords.begin(), kUnsupportedKeywords.end(), eq);
}

bool is_unsupported_keyword(std::string_view upper_word) {
    return std::any_of(kUnsupportedKeywords.begin(), kUnsupportedKeywords.end(),
                       [&](const char* k) { return upper_word == k; });
}

[[noreturn]] void syntax_error(std::size_t offset, const std::string& message) {
    throw Error(ErrorCode::SyntaxError, message + " at offset " + std::to_string(offset + 1)).with_offset(offset + 1);
}

[[noreturn]] void unsupported(const std::string& what) {
    throw Error(ErrorCode::UnsupportedFeature, what + " is not supported");
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (ident_start(c)) {
            while (i < text.size() && ident_char(text[i])) ++i;
            auto word = text.substr(start, i - start);
            auto up = upper(word);
            if (is_keyword(up)) {
                out.push_back({Tok::Keyword, up, start});
            } else {
                out.push_back({Tok::Ident, std::string(word), start});
            }
            continue;
        }
        if (digit(c) || (c == '-' && i + 1 < text.size() && digit(text[i + 1]))) {
            ++i;
            while (i < text.size() && digit(text[i])) ++i;
            bool real = false;
            if (i < text.size() && text[i] == '.') {
                if (i + 1 >= text.size() || !digit(text[i + 1])) syntax_error(i, "expected digits after '.'");
                real = true;
                ++i;
                while (i < text.size() && digit(text[i])) ++i;
            }
            if (i < text.size() && ident_char(text[i])) syntax_error(i, "malformed number");
            out.push_back({real ? Tok::Real : Tok::Integer, std::string(text.substr(start, i - start)), start});
            continue;
        }
        if (c == '\'') {
            std::string value;
            ++i;
            while (true) {
                if (i >= text.size()) syntax_error(start, "unterminated string literal");
                if (text[i] == '\'') {
                    if (i + 1 < text.size() && text[i + 1] == '\'') {
                        value += '\'';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                value += text[i++];
            }
            out.push_back({Tok::String, std::move(value), start});
            continue;
        }
        auto two = text.substr(i, 2);
        if (two == "!=" || two == "<=" || two == ">=" || two == "<>") {
            if (two == "<>") syntax_error(i, "use != for inequality");
            out.push_back({Tok::Symbol, std::string(two), start});
            i += 2;
            continue;
        }
        if (std::string_view(",.*=<>();").find(c) != std::string_view::npos) {
            out.push_back({Tok::Symbol, std::string(1, c), start});
            ++i;
            continue;
        }
        syntax_error(i, std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::End, "", text.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    QueryAst parse() {
        QueryAst ast;
        if (peek().kind == Tok::Keyword && peek().text != "SELECT" && is_unsupported_keyword(peek().text)) {
            unsupported(peek().text + " statements");
        }
        expect_keyword("SELECT");
        parse_select_list(ast);
        expect_keyword("FROM");
        parse_from_list(ast);
        if (accept_keyword("WHERE")) {
            ast.where.push_back(parse_predicate());
            while (accept_keyword("AND")) ast.where.push_back(parse_predicate());
        }
        if (accept_keyword("ORDER")) {
            expect_keyword("BY");
            do {
                OrderItem item{parse_column_ref(), false};
                if (accept_keyword("DESC")) {
                    item.descending = true;
                } else {
                    accept_keyword("ASC");
                }
                ast.order_by.push_back(std::move(item));
            } while (accept_symbol(","));
        }
        if (accept_keyword("LIMIT")) {
            const Token& t = peek();
            if (t.kind != Tok::Integer) syntax_error(t.offset, "LIMIT expects a positive integer");
            std::int64_t n = 0;
            auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), n);
            if (res.ec != std::errc{} || n <= 0) syntax_error(t.offset, "LIMIT expects a positive integer");
            ast.limit = n;
            advance();
        }
        accept_symbol(";");
        if (peek().kind != Tok::End) reject_trailing();
        return ast;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    const Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

    bool accept_keyword(const char* kw) {
        if (peek().kind == Tok::Keyword && peek().text == kw) {
            advance();
            return true;
        }
        return false;
    }
    bool accept_symbol(const char* sym) {
        if (peek().kind == Tok::Symbol && peek().text == sym) {
            advance();
            return true;
        }
        return false;
    }
    void check_unsupported() const {
        const Token& t = peek();
        if (t.kind == Tok::Keyword && is_unsupported_keyword(t.text)) unsupported(t.text);
    }
    void expect_keyword(const char* kw) {
        check_unsupported();
        if (!accept_keyword(kw)) syntax_error(peek().offset, std::string("expected ") + kw + describe_found());
    }
    std::string describe_found() const {
        const Token& t = peek();
        if (t.kind == Tok::End) return ", found end of input";
        return ", found '" + t.text + "'";
    }

    std::string expect_identifier(const char* what) {
        check_unsupported();
        const Token& t = peek();
        if (t.kind != Tok::Ident) syntax_error(t.offset, std::string("expected ") + what + describe_found());
        return advance().text;
    }

    void reject_trailing() const {
        check_unsupported();
        syntax_error(peek().offset, "unexpected '" + peek().text + "'");
    }

    void reject_call_or_subquery() const {
        if (peek().kind == Tok::Symbol && peek().text == "(") unsupported("function calls and aggregates");
    }

    ColumnRef parse_column_ref() {
        ColumnRef ref;
        std::string first = expect_identifier("column name");
        reject_call_or_subquery();
        if (accept_symbol(".")) {
            if (peek().kind == Tok::Symbol && peek().text == "*") unsupported("qualified star");
            ref.qualifier = std::move(first);
            ref.column = expect_identifier("column name");
            reject_call_or_subquery();
        } else {
            ref.column = std::move(first);
        }
        return ref;
    }

    void parse_select_list(QueryAst& ast) {
        if (accept_symbol("*")) {
            ast.select_star = true;
            return;
        }
        if (peek().kind == Tok::Symbol && peek().text == "(") unsupported("subqueries");
        do {
            ast.select_items.push_back(parse_column_ref());
        } while (accept_symbol(","));
    }

    void parse_from_list(QueryAst& ast) {
        std::set<std::string> names;
        do {
            if (peek().kind == Tok::Symbol && peek().text == "(") unsupported("subqueries");
            const std::size_t at = peek().offset;
            TableRef ref;
            ref.name = expect_identifier("table name");
            reject_call_or_subquery();
            if (accept_keyword("AS")) {
                ref.alias = expect_identifier("alias");
            } else if (peek().kind == Tok::Ident) {
                ref.alias = advance().text;
            }
            if (!names.insert(ref.effective_name()).second) {
                syntax_error(at, "duplicate table name or alias '" + ref.effective_name() + "'");
            }
            ast.from_tables.push_back(std::move(ref));
        } while (accept_symbol(","));
    }

    Predicate parse_predicate() {
        if (peek().kind == Tok::Symbol && peek().text == "(") unsupported("parenthesized predicates");
        Predicate p;
        p.left = parse_column_ref();
        check_unsupported();
        const Token& op = peek();
        if (op.kind != Tok::Symbol) syntax_error(op.offset, "expected comparison operator" + describe_found());
        if (op.text == "=") p.op = CompareOp::Eq;
        else if (op.text == "!=") p.op = CompareOp::Ne;
        else if (op.text == "<") p.op = CompareOp::Lt;
        else if (op.text == "<=") p.op = CompareOp::Le;
        else if (op.text == ">") p.op = CompareOp::Gt;
        else if (op.text == ">=") p.op = CompareOp::Ge;
        else syntax_error(op.offset, "expected comparison operator" + describe_found());
        advance();
        const Token& rhs = peek();
        switch (rhs.kind) {
            case Tok::Integer: {
                std::int64_t v = 0;
                auto res = std::from_chars(rhs.text.data(), rhs.text.data() + rhs.text.size(), v);
                if (res.ec != std::errc{}) syntax_error(rhs.offset, "integer literal out of range");
                p.right = Literal{DataType::Integer, Value{v}};
                advance();
                break;
            }
            case Tok::Real: {
                double v = 0;
                std::from_chars(rhs.text.data(), rhs.text.data() + rhs.text.size(), v);
                p.right = Literal{DataType::Real, Value{v}};
                advance();
                break;
            }
            case Tok::String:
                p.right = Literal{DataType::Text, Value{rhs.text}};
                advance();
                break;
            case Tok::Ident: p.right = parse_column_ref(); break;
            default:
                check_unsupported();
                if (rhs.kind == Tok::Symbol && rhs.text == "(") unsupported("subqueries");
                syntax_error(rhs.offset, "expected column or literal" + describe_found());
        }
        return p;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

QueryAst parse_sql(std::string_view text) { return Parser(tokenize(text)).parse(); }

std::string render_column(const ColumnRef& ref) {
    return ref.qualifier ? *ref.qualifier + "." + ref.column : ref.column;
}

std::string render_literal(const Literal& literal) {
    const Value& v = literal.value;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&v)) {
        char buf[512];
        auto res = std::to_chars(buf, buf + sizeof buf, *d, std::chars_format::fixed);
        std::string out(buf, res.ptr);
        if (out.find('.') == std::string::npos) out += ".0";
        return out;
    }
    std::string text = value_to_text(v);
    std::string out = "'";
    for (char c : text) {
        if (c == '\'') out += '\'';
        out += c;
    }
    out += '\'';
    return out;
}

std::string render_sql(const QueryAst& ast) {
    std::string out = "SELECT ";
    if (ast.select_star) {
        out += "*";
    } else {
        for (std::size_t i = 0; i < ast.select_items.size(); ++i) {
            if (i) out += ", ";
            out += render_column(ast.select_items[i]);
        }
    }
    out += " FROM ";
    for (std::size_t i = 0; i < ast.from_tables.size(); ++i) {
        if (i) out += ", ";
        out += ast.from_tables[i].name;
        if (ast.from_tables[i].alias) out += " " + *ast.from_tables[i].alias;
    }
    for (std::size_t i = 0; i < ast.where.size(); ++i) {
        const auto& p = ast.where[i];
        out += i ? " AND " : " WHERE ";
        out += render_column(p.left);
        out += " ";
        out += op_symbol(p.op);
        out += " ";
        if (const auto* col = std::get_if<ColumnRef>(&p.right)) {
            out += render_column(*col);
        } else {
            out += render_literal(std::get<Literal>(p.right));
        }
    }
    for (std::size_t i = 0; i < ast.order_by.size(); ++i) {
        out += i ? ", " : " ORDER BY ";
        out += render_column(ast.order_by[i].column);
        if (ast.order_by[i].descending) out += " DESC";
    }
    if (ast.limit) out += " LIMIT " + std::to_string(*ast.limit);
    return out;
}

}  // namespace fedsql
