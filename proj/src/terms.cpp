#include "colweb/terms.hpp"

#include <algorithm>

#include "colweb/errors.hpp"
#include "colweb/pretty.hpp"

namespace colweb {

const Term* Binding::find(const std::string& var) const {
    auto it = map_.find(var);
    return it == map_.end() ? nullptr : &it->second;
}

namespace {

bool occurs(const std::string& var, const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Nat: return false;
        case Term::Kind::Var: return t.var_name() == var;
        case Term::Kind::Succ: return occurs(var, t.succ_arg());
        case Term::Kind::Plus: return occurs(var, t.plus_lhs()) || occurs(var, t.plus_rhs());
    }
    return false;
}

Term subst_term(const Term& t, const std::map<std::string, Term>& m) {
    switch (t.kind()) {
        case Term::Kind::Nat: return t;
        case Term::Kind::Var: {
            auto it = m.find(t.var_name());
            return it == m.end() ? t : it->second;
        }
        case Term::Kind::Succ: return Term::succ(subst_term(t.succ_arg(), m));
        case Term::Kind::Plus:
            return Term::plus(subst_term(t.plus_lhs(), m), subst_term(t.plus_rhs(), m));
    }
    return t;
}

}  // namespace

bool Binding::bind(const std::string& var, Term value) {
    Term resolved = subst_term(value, map_);
    if (resolved.kind() == Term::Kind::Var && resolved.var_name() == var) return true;
    if (occurs(var, resolved)) return false;
    // Keep idempotence: fold the new pair into every existing entry.
    std::map<std::string, Term> one{{var, resolved}};
    for (auto& [k, v] : map_) v = subst_term(v, one);
    map_.emplace(var, std::move(resolved));
    return true;
}

std::uint64_t eval_term(const Term& t, const Binding& b) {
    switch (t.kind()) {
        case Term::Kind::Nat: return t.nat_value();
        case Term::Kind::Var: {
            const Term* v = b.find(t.var_name());
            if (!v || (v->kind() == Term::Kind::Var && v->var_name() == t.var_name()))
                throw UnboundVariable("unbound variable: " + t.var_name(), t.var_name());
            return eval_term(*v, b);
        }
        case Term::Kind::Succ: return eval_term(t.succ_arg(), b) + 1;
        case Term::Kind::Plus: return eval_term(t.plus_lhs(), b) + eval_term(t.plus_rhs(), b);
    }
    throw UnboundVariable("malformed term", "?");
}

Term apply_subst(const Term& t, const Binding& b) { return subst_term(t, b.entries()); }

Atom apply_subst(const Atom& a, const Binding& b) {
    Atom out{a.pred, {}};
    out.args.reserve(a.args.size());
    for (const auto& t : a.args) out.args.push_back(apply_subst(t, b));
    return out;
}

AgentPath apply_subst(const AgentPath& p, const Binding& b) {
    AgentPath out{p.name, std::nullopt};
    if (p.index) out.index = apply_subst(*p.index, b);
    return out;
}

namespace {

std::string pick_fresh(const std::string& base, const std::set<std::string>& avoid) {
    if (!avoid.count(base)) return base;
    for (std::uint64_t i = 1;; ++i) {
        std::string cand = base + "_" + std::to_string(i);
        if (!avoid.count(cand)) return cand;
    }
}

// Substitution under a binder: the bound variable shadows the binding, and
// the binder is renamed when a replacement term would capture it.
Formula subst_under(const Formula& body, std::vector<std::string>& bound, Binding b);

Formula subst_formula(const Formula& f, const Binding& b) {
    using K = Formula::Kind;
    switch (f.kind()) {
        case K::Atom: return Formula::atom(apply_subst(f.atom_value(), b));
        case K::Conj: {
            std::vector<Formula> parts;
            parts.reserve(f.parts().size());
            for (const auto& p : f.parts()) parts.push_back(subst_formula(p, b));
            return Formula::conj(std::move(parts));
        }
        case K::Impl:
            return Formula::impl(subst_formula(f.body(), b), apply_subst(f.head(), b));
        case K::Blind: {
            std::vector<std::string> vars = f.vars();
            Formula body = subst_under(f.body(), vars, b);
            return Formula::blind(std::move(vars), std::move(body));
        }
        case K::ChooseAll:
        case K::ChooseEx: {
            std::vector<std::string> vars = {f.var()};
            Formula body = subst_under(f.body(), vars, b);
            return f.kind() == K::ChooseAll ? Formula::choose_all(vars[0], std::move(body))
                                            : Formula::choose_ex(vars[0], std::move(body));
        }
        case K::Context: {
            std::vector<AgentPath> ctx;
            ctx.reserve(f.context().size());
            for (const auto& p : f.context()) ctx.push_back(apply_subst(p, b));
            return Formula::with_context(subst_formula(f.body(), b), std::move(ctx));
        }
        case K::Macro: return Formula::macro(apply_subst(f.macro_path(), b));
    }
    return f;
}

Formula subst_under(const Formula& body, std::vector<std::string>& bound, Binding b) {
    Binding inner;
    std::set<std::string> replacement_vars;
    for (const auto& [k, v] : b.entries()) {
        if (std::find(bound.begin(), bound.end(), k) != bound.end()) continue;
        inner.bind(k, v);
        free_vars(v, replacement_vars);
    }
    // Rename any binder that a replacement term would capture.
    Binding rename;
    std::set<std::string> avoid = replacement_vars;
    std::set<std::string> body_vars;
    free_vars(body, body_vars);
    avoid.insert(body_vars.begin(), body_vars.end());
    for (auto& v : bound) {
        if (!replacement_vars.count(v)) continue;
        std::string fresh = pick_fresh(v, avoid);
        avoid.insert(fresh);
        rename.bind(v, Term::var(fresh));
        v = fresh;
    }
    Formula renamed = rename.empty() ? body : subst_formula(body, rename);
    return inner.empty() ? renamed : subst_formula(renamed, inner);
}

}  // namespace

Formula apply_subst(const Formula& f, const Binding& b) { return subst_formula(f, b); }

Term normalize_term(const Term& t) {
    if (t.is_ground()) return Term::nat(eval_term(t));
    switch (t.kind()) {
        case Term::Kind::Succ: return Term::succ(normalize_term(t.succ_arg()));
        case Term::Kind::Plus:
            return Term::plus(normalize_term(t.plus_lhs()), normalize_term(t.plus_rhs()));
        default: return t;
    }
}

Atom normalize_atom(const Atom& a) {
    Atom out{a.pred, {}};
    out.args.reserve(a.args.size());
    for (const auto& t : a.args) out.args.push_back(normalize_term(t));
    return out;
}

AgentPath normalize_path(const AgentPath& p) {
    AgentPath out{p.name, std::nullopt};
    if (p.index) out.index = normalize_term(*p.index);
    return out;
}

Formula normalize_formula(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
        case K::Atom: return Formula::atom(normalize_atom(f.atom_value()));
        case K::Conj: {
            std::vector<Formula> parts;
            for (const auto& p : f.parts()) parts.push_back(normalize_formula(p));
            return Formula::conj(std::move(parts));
        }
        case K::Impl: return Formula::impl(normalize_formula(f.body()), normalize_atom(f.head()));
        case K::Blind: return Formula::blind(f.vars(), normalize_formula(f.body()));
        case K::ChooseAll: return Formula::choose_all(f.var(), normalize_formula(f.body()));
        case K::ChooseEx: return Formula::choose_ex(f.var(), normalize_formula(f.body()));
        case K::Context: {
            std::vector<AgentPath> ctx;
            for (const auto& p : f.context()) ctx.push_back(normalize_path(p));
            return Formula::with_context(normalize_formula(f.body()), std::move(ctx));
        }
        case K::Macro: return Formula::macro(normalize_path(f.macro_path()));
    }
    return f;
}

std::optional<LinearPattern> linear_decompose(const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Nat: return LinearPattern{std::nullopt, t.nat_value()};
        case Term::Kind::Var: return LinearPattern{t.var_name(), 0};
        case Term::Kind::Succ: {
            auto inner = linear_decompose(t.succ_arg());
            if (!inner) return std::nullopt;
            inner->offset += 1;
            return inner;
        }
        case Term::Kind::Plus: {
            auto l = linear_decompose(t.plus_lhs());
            auto r = linear_decompose(t.plus_rhs());
            if (!l || !r) return std::nullopt;
            if (l->var && r->var) return std::nullopt;  // two variables (or one twice)
            LinearPattern out;
            out.var = l->var ? l->var : r->var;
            out.offset = l->offset + r->offset;
            return out;
        }
    }
    return std::nullopt;
}

std::optional<Binding> match_index(const Term& pattern, std::uint64_t n) {
    auto lp = linear_decompose(pattern);
    if (!lp)
        throw UnsupportedPattern("cannot invert index pattern '" + pretty(pattern) +
                                 "': more than one variable");
    Binding b;
    if (!lp->var) return lp->offset == n ? std::optional<Binding>(b) : std::nullopt;
    if (n < lp->offset) return std::nullopt;
    b.bind(*lp->var, Term::nat(n - lp->offset));
    return b;
}

namespace {

bool unify_rec(const Term& a, const Term& b, Binding& sigma) {
    Term x = apply_subst(a, sigma);
    Term y = apply_subst(b, sigma);
    if (x.is_ground()) x = Term::nat(eval_term(x));
    if (y.is_ground()) y = Term::nat(eval_term(y));

    if (x.kind() == Term::Kind::Nat && y.kind() == Term::Kind::Nat)
        return x.nat_value() == y.nat_value();
    if (x.kind() == Term::Kind::Var && y.kind() == Term::Kind::Var &&
        x.var_name() == y.var_name())
        return true;
    if (x.kind() == Term::Kind::Var) return sigma.bind(x.var_name(), y);
    if (y.kind() == Term::Kind::Var) return sigma.bind(y.var_name(), x);

    // One side a concrete natural: invert a linear pattern, fail otherwise.
    auto invert = [&sigma](std::uint64_t n, const Term& pat) {
        auto lp = linear_decompose(pat);
        if (!lp || !lp->var) return false;
        if (n < lp->offset) return false;
        return sigma.bind(*lp->var, Term::nat(n - lp->offset));
    };
    if (x.kind() == Term::Kind::Nat) return invert(x.nat_value(), y);
    if (y.kind() == Term::Kind::Nat) return invert(y.nat_value(), x);

    // Both non-ground compounds. Two one-variable linear patterns unify by
    // shifting the offset difference onto the smaller side; that binding is
    // satisfied by every solution. Recursing into other shapes would pick one
    // solution among many (x+1 against y+z, say), so anything else fails.
    auto lx = linear_decompose(x);
    auto ly = linear_decompose(y);
    if (!lx || !ly) return false;
    if (*lx->var == *ly->var) return lx->offset == ly->offset;
    const LinearPattern& low = lx->offset <= ly->offset ? *lx : *ly;
    const LinearPattern& high = lx->offset <= ly->offset ? *ly : *lx;
    std::uint64_t d = high.offset - low.offset;
    Term rhs = d == 0 ? Term::var(*high.var) : Term::plus(Term::var(*high.var), Term::nat(d));
    return sigma.bind(*low.var, std::move(rhs));
}

}  // namespace

std::optional<Binding> unify_terms(const Term& a, const Term& b, Binding seed) {
    if (unify_rec(a, b, seed)) return seed;
    return std::nullopt;
}

std::optional<Binding> unify(const Atom& a, const Atom& b, Binding seed) {
    if (a.pred != b.pred || a.args.size() != b.args.size()) return std::nullopt;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!unify_rec(a.args[i], b.args[i], seed)) return std::nullopt;
    return seed;
}

void free_vars(const Term& t, std::set<std::string>& out) {
    switch (t.kind()) {
        case Term::Kind::Nat: return;
        case Term::Kind::Var: out.insert(t.var_name()); return;
        case Term::Kind::Succ: free_vars(t.succ_arg(), out); return;
        case Term::Kind::Plus:
            free_vars(t.plus_lhs(), out);
            free_vars(t.plus_rhs(), out);
            return;
    }
}

void free_vars(const Atom& a, std::set<std::string>& out) {
    for (const auto& t : a.args) free_vars(t, out);
}

void free_vars(const AgentPath& p, std::set<std::string>& out) {
    if (p.index) free_vars(*p.index, out);
}

void free_vars(const Formula& f, std::set<std::string>& out) {
    using K = Formula::Kind;
    switch (f.kind()) {
        case K::Atom: free_vars(f.atom_value(), out); return;
        case K::Conj:
            for (const auto& p : f.parts()) free_vars(p, out);
            return;
        case K::Impl:
            free_vars(f.body(), out);
            free_vars(f.head(), out);
            return;
        case K::Blind:
        case K::ChooseAll:
        case K::ChooseEx: {
            std::set<std::string> inner;
            free_vars(f.body(), inner);
            for (const auto& v : f.kind() == K::Blind ? f.vars()
                                                      : std::vector<std::string>{f.var()})
                inner.erase(v);
            out.insert(inner.begin(), inner.end());
            return;
        }
        case K::Context:
            free_vars(f.body(), out);
            for (const auto& p : f.context()) free_vars(p, out);
            return;
        case K::Macro: free_vars(f.macro_path(), out); return;
    }
}

}  // namespace colweb
