// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include "fedsql/planner.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "fedsql/backend.hpp"
#include "fedsql/error.hpp"

namespace fedsql {

Partition partition_tables(const BoundQuery& bq, const ReplicaLookup& lookup) {
    Partition out;
    std::map<std::string, std::string> chosen;
    for (std::size_t i = 0; i < bq.tables.size(); ++i) {
        const auto& t = bq.tables[i];
        if (t.local) {
            out[Target::local(t.source_id)].push_back(i);
            continue;
        }
        auto it = chosen.find(t.logical_name);
        if (it == chosen.end()) {
            std::vector<std::string> urls = lookup ? lookup(t.logical_name) : std::vector<std::string>{};
            if (urls.empty()) {
                throw Error(ErrorCode::UnknownTable,
                            "table '" + t.logical_name + "' is neither registered locally nor published in the RLS");
            }
            it = chosen.emplace(t.logical_name, *std::min_element(urls.begin(), urls.end())).first;
        }
        out[Target::remote(it->second)].push_back(i);
    }
    return out;
}

std::vector<std::string> SubQuery::select_fields() const {
    if (select_all) return {"*"};
    std::vector<std::string> out;
    out.reserve(output.size());
    for (const auto& c : output) out.push_back(c.field);
    return out;
}

std::string SubQuery::where_clause() const {
    std::string out;
    for (std::size_t i = 0; i < where_terms.size(); ++i) {
        if (i) out += " AND ";
        out += where_terms[i];
    }
    return out;
}

std::string render_subquery(const SubQuery& sq) {
    return compose_select(sq.select_fields(), sq.tables, sq.where_clause());
}

namespace {

struct DisjointSets {
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::size_t> parent;
};

const BoundColumn* right_column(const BoundPredicate& p) { return std::get_if<BoundColumn>(&p.right); }

/// Column text as the target understands it: physical names for local
/// sources, logical names for peers (which resolve them themselves).
std::string target_field(const BoundQuery& bq, const BoundColumn& c) {
    const auto& t = bq.tables[c.table];
    return t.alias + "." + (t.local ? c.physical : c.logical);
}

std::string render_pushed(const BoundQuery& bq, const BoundPredicate& p) {
    std::string out = target_field(bq, p.left) + " " + std::string(op_symbol(p.op)) + " ";
    if (const auto* rc = right_column(p)) {
        out += target_field(bq, *rc);
    } else {
        out += render_literal(std::get<Literal>(p.right));
    }
    return out;
}

struct Edge {
    std::size_t a;  ///< sub-query owning p.left
    std::size_t b;  ///< sub-query owning the right column
    const BoundPredicate* predicate;
};

class Planner {
public:
    Planner(const BoundQuery& bq, const Partition& partition) : bq_(bq), partition_(partition) {}

    QueryPlan run() {
        form_subqueries();
        place_predicates();
        order_joins();
        choose_outputs();
        QueryPlan out;
        out.subqueries = std::move(subs_);
        out.merge = std::move(merge_);
        for (const auto& o : bq_.order_by) out.order_by.push_back({merged_name(bq_, o.column), o.descending});
        out.limit = bq_.limit;
        out.query = bq_;
        return out;
    }

private:
    void form_subqueries() {
        std::vector<const Target*> owner(bq_.tables.size(), nullptr);
        for (const auto& [target, tables] : partition_) {
            for (auto i : tables) {
                if (i >= owner.size() || owner[i]) {
                    throw Error(ErrorCode::InvalidArgument, "partition does not assign each table exactly once");
                }
                owner[i] = &target;
            }
        }
        if (std::find(owner.begin(), owner.end(), nullptr) != owner.end()) {
            throw Error(ErrorCode::InvalidArgument, "partition does not cover every table");
        }
        // Tables of one target stay together only when linked by a predicate
        // the target can evaluate; unlinked ones would be a cross product.
        DisjointSets sets(bq_.tables.size());
        for (const auto& p : bq_.where) {
            if (const auto* rc = right_column(p); rc && *owner[p.left.table] == *owner[rc->table]) {
                sets.unite(p.left.table, rc->table);
            }
        }
        for (const auto& [target, tables] : partition_) {
            std::map<std::size_t, std::vector<std::size_t>> components;
            for (auto i : tables) components[sets.find(i)].push_back(i);
            for (auto& [root, members] : components) {
                std::sort(members.begin(), members.end());
                SubQuery sq;
                sq.target = target;
                sq.table_indices = members;
                for (auto i : members) {
                    const auto& t = bq_.tables[i];
                    const std::string& name = t.local ? t.physical_name : t.logical_name;
                    sq.tables.push_back(name == t.alias ? name : name + " " + t.alias);
                    table_to_sub_[i] = subs_.size();
                }
                subs_.push_back(std::move(sq));
            }
        }
    }

    void place_predicates() {
        for (const auto& p : bq_.where) {
            const std::size_t a = table_to_sub_.at(p.left.table);
            const auto* rc = right_column(p);
            const std::size_t b = rc ? table_to_sub_.at(rc->table) : a;
            if (a == b) {
                subs_[a].predicates.push_back(p);
                subs_[a].where_terms.push_back(render_pushed(bq_, p));
            } else if (p.op == CompareOp::Eq) {
                edges_.push_back({a, b, &p});
            } else {
                merge_.residual_predicates.push_back(p);
            }
        }
    }

    void order_joins() {
        if (subs_.empty()) return;
        std::vector<bool> joined(subs_.size(), false);
        joined[0] = true;
        merge_.first_input = 0;
        for (std::size_t step = 1; step < subs_.size(); ++step) {
            std::optional<std::size_t> next;
            for (std::size_t j = 0; j < subs_.size() && !next; ++j) {
                if (joined[j]) continue;
                for (const auto& e : edges_) {
                    if ((e.a == j && joined[e.b]) || (e.b == j && joined[e.a])) {
                        next = j;
                        break;
                    }
                }
            }
            if (!next) {
                throw Error(ErrorCode::CrossProductRejected,
                            "tables " + describe_unjoined(joined) +
                                " are not linked to the rest of the query by an equality predicate");
            }
            JoinStep js;
            js.right_input = *next;
            for (const auto& e : edges_) {
                const BoundColumn& l = e.predicate->left;
                const BoundColumn& r = *right_column(*e.predicate);
                if (e.a == *next && joined[e.b]) {
                    js.keys.push_back({merged_name(bq_, r), merged_name(bq_, l)});
                } else if (e.b == *next && joined[e.a]) {
                    js.keys.push_back({merged_name(bq_, l), merged_name(bq_, r)});
                } else {
                    continue;
                }
                js.predicates.push_back(*e.predicate);
            }
            joined[*next] = true;
            merge_.join_steps.push_back(std::move(js));
        }
    }

    std::string describe_unjoined(const std::vector<bool>& joined) const {
        std::string out;
        for (std::size_t j = 0; j < subs_.size(); ++j) {
            if (joined[j]) continue;
            for (auto i : subs_[j].table_indices) {
                if (!out.empty()) out += ", ";
                out += bq_.tables[i].alias;
            }
        }
        return out;
    }

    void choose_outputs() {
        // Needed columns, in first-need order.
        std::vector<std::vector<BoundColumn>> needed(subs_.size());
        auto need = [&](const BoundColumn& c) {
            auto& list = needed[table_to_sub_.at(c.table)];
            for (const auto& existing : list) {
                if (existing.table == c.table && existing.logical == c.logical) return;
            }
            list.push_back(c);
        };
        if (bq_.select_star) {
            for (std::size_t i = 0; i < bq_.tables.size(); ++i) {
                for (const auto& c : bq_.tables[i].columns) need(BoundColumn{i, c.logical, c.physical, c.type});
            }
        } else {
            for (const auto& c : bq_.select) need(c);
        }
        for (const auto& js : merge_.join_steps) {
            for (const auto& p : js.predicates) {
                need(p.left);
                need(*right_column(p));
            }
        }
        for (const auto& p : merge_.residual_predicates) {
            need(p.left);
            if (const auto* rc = right_column(p)) need(*rc);
        }
        for (const auto& o : bq_.order_by) need(o.column);

        for (std::size_t s = 0; s < subs_.size(); ++s) {
            auto& sq = subs_[s];
            if (!sq.target.is_local() && bq_.select_star) {
                sq.select_all = true;
                continue;
            }
            auto cols = needed[s];
            std::stable_sort(cols.begin(), cols.end(),
                             [](const BoundColumn& a, const BoundColumn& b) { return a.table < b.table; });
            if (cols.empty()) {
                // Row multiplicity still matters; ship the cheapest thing available.
                const auto& t = bq_.tables[sq.table_indices.front()];
                if (!t.local) {
                    sq.select_all = true;
                    continue;
                }
                const auto& c = t.columns.front();
                cols.push_back(BoundColumn{sq.table_indices.front(), c.logical, c.physical, c.type});
            }
            for (const auto& c : cols) sq.output.push_back({merged_name(bq_, c), target_field(bq_, c), c.type});
        }

        if (bq_.select_star) {
            for (const auto& t : bq_.tables) merge_.projection.push_back({t.alias, std::nullopt});
        } else {
            for (const auto& c : bq_.select) merge_.projection.push_back({bq_.tables[c.table].alias, c.logical});
        }
    }

    const BoundQuery& bq_;
    const Partition& partition_;
    std::vector<SubQuery> subs_;
    std::map<std::size_t, std::size_t> table_to_sub_;
    std::vector<Edge> edges_;
    MergePlan merge_;
};

}  // namespace

QueryPlan plan(const BoundQuery& bq, const Partition& partition) { return Planner(bq, partition).run(); }

}  // namespace fedsql
