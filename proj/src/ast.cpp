#include "colweb/ast.hpp"

#include "colweb/terms.hpp"

namespace colweb {

Term Term::nat(std::uint64_t value) {
    Term t;
    t.kind_ = Kind::Nat;
    t.nat_ = value;
    return t;
}

Term Term::var(std::string name) {
    Term t;
    t.kind_ = Kind::Var;
    t.var_ = std::move(name);
    return t;
}

Term Term::succ(Term arg) {
    Term t;
    t.kind_ = Kind::Succ;
    t.a_ = std::make_shared<const Term>(std::move(arg));
    return t;
}

Term Term::plus(Term lhs, Term rhs) {
    Term t;
    t.kind_ = Kind::Plus;
    t.a_ = std::make_shared<const Term>(std::move(lhs));
    t.b_ = std::make_shared<const Term>(std::move(rhs));
    return t;
}

bool Term::is_ground() const {
    switch (kind_) {
        case Kind::Nat: return true;
        case Kind::Var: return false;
        case Kind::Succ: return a_->is_ground();
        case Kind::Plus: return a_->is_ground() && b_->is_ground();
    }
    return false;
}

bool operator==(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
        case Term::Kind::Nat: return a.nat_ == b.nat_;
        case Term::Kind::Var: return a.var_ == b.var_;
        case Term::Kind::Succ: return *a.a_ == *b.a_;
        case Term::Kind::Plus: return *a.a_ == *b.a_ && *a.b_ == *b.b_;
    }
    return false;
}

bool Atom::is_ground() const {
    for (const auto& t : args)
        if (!t.is_ground()) return false;
    return true;
}

bool AgentPath::is_ground() const { return !index.has_value() || index->is_ground(); }

bool operator==(const AgentPath& a, const AgentPath& b) {
    if (a.name != b.name) return false;
    if (a.index.has_value() != b.index.has_value()) return false;
    if (!a.index.has_value()) return true;
    // Indices compare by value when both are ground, structurally otherwise.
    if (a.index->is_ground() && b.index->is_ground())
        return eval_term(*a.index) == eval_term(*b.index);
    return *a.index == *b.index;
}

Formula Formula::atom(Atom a) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::Atom;
    n->atom = std::move(a);
    return Formula(std::move(n));
}

Formula Formula::conj(std::vector<Formula> parts) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::Conj;
    n->parts = std::move(parts);
    return Formula(std::move(n));
}

Formula Formula::impl(Formula body, Atom head) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::Impl;
    n->body = std::move(body);
    n->atom = std::move(head);
    return Formula(std::move(n));
}

Formula Formula::blind(std::vector<std::string> vars, Formula body) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::Blind;
    n->vars = std::move(vars);
    n->body = std::move(body);
    return Formula(std::move(n));
}

Formula Formula::choose_all(std::string var, Formula body) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::ChooseAll;
    n->vars = {std::move(var)};
    n->body = std::move(body);
    return Formula(std::move(n));
}

Formula Formula::choose_ex(std::string var, Formula body) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::ChooseEx;
    n->vars = {std::move(var)};
    n->body = std::move(body);
    return Formula(std::move(n));
}

Formula Formula::with_context(Formula inner, std::vector<AgentPath> ctx) {
    std::vector<AgentPath> merged;
    auto push_unique = [&merged](const AgentPath& p) {
        for (const auto& q : merged)
            if (q == p) return;
        merged.push_back(p);
    };
    if (inner.kind() == Kind::Context) {
        for (const auto& p : inner.context()) push_unique(p);
        for (const auto& p : ctx) push_unique(p);
        inner = inner.body();
    } else {
        for (const auto& p : ctx) push_unique(p);
    }
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::Context;
    n->body = std::move(inner);
    n->ctx = std::move(merged);
    return Formula(std::move(n));
}

Formula Formula::macro(AgentPath path) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::Macro;
    n->mpath = std::move(path);
    return Formula(std::move(n));
}

Formula::Kind Formula::kind() const { return node_->kind; }
const Atom& Formula::atom_value() const { return node_->atom; }
const std::vector<Formula>& Formula::parts() const { return node_->parts; }
const Formula& Formula::body() const { return *node_->body; }
const Atom& Formula::head() const { return node_->atom; }
const std::vector<std::string>& Formula::vars() const { return node_->vars; }
const std::string& Formula::var() const { return node_->vars.front(); }
const std::vector<AgentPath>& Formula::context() const { return node_->ctx; }
const AgentPath& Formula::macro_path() const { return node_->mpath; }

bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Formula::Kind::Atom: return a.atom_value() == b.atom_value();
        case Formula::Kind::Conj: return a.parts() == b.parts();
        case Formula::Kind::Impl: return a.head() == b.head() && a.body() == b.body();
        case Formula::Kind::Blind: return a.vars() == b.vars() && a.body() == b.body();
        case Formula::Kind::ChooseAll:
        case Formula::Kind::ChooseEx: return a.var() == b.var() && a.body() == b.body();
        case Formula::Kind::Context: return a.context() == b.context() && a.body() == b.body();
        case Formula::Kind::Macro: return a.macro_path() == b.macro_path();
    }
    return false;
}

}  // namespace colweb
