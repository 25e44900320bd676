#include "colweb/solver.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "colweb/errors.hpp"
#include "colweb/pretty.hpp"

namespace colweb {

namespace {

Formula clause_formula(const Clause& c) {
    std::vector<Formula> body;
    body.reserve(c.body.size());
    for (const auto& a : c.body) body.push_back(Formula::atom(a));
    Formula f = body.empty() ? Formula::atom(c.head)
                : body.size() == 1
                    ? Formula::impl(std::move(body[0]), c.head)
                    : Formula::impl(Formula::conj(std::move(body)), c.head);
    if (!c.vars.empty()) f = Formula::blind(c.vars, std::move(f));
    return f;
}

// Atoms a query formula is about: the conjunction of predicate applications
// under its choice quantifiers and annotations. Implications and macros are
// not part of the kernel.
void kernel_atoms(const Formula& f, std::vector<Atom>& out) {
    switch (f.kind()) {
        case Formula::Kind::Atom: out.push_back(f.atom_value()); return;
        case Formula::Kind::Conj:
            for (const auto& p : f.parts()) kernel_atoms(p, out);
            return;
        case Formula::Kind::ChooseAll:
        case Formula::Kind::ChooseEx:
        case Formula::Kind::Context: kernel_atoms(f.body(), out); return;
        default: return;
    }
}

bool contains_kind(const Formula& f, Formula::Kind k) {
    if (f.kind() == k) return true;
    switch (f.kind()) {
        case Formula::Kind::Conj:
            return std::any_of(f.parts().begin(), f.parts().end(),
                               [&](const Formula& p) { return contains_kind(p, k); });
        case Formula::Kind::Impl:
        case Formula::Kind::Blind:
        case Formula::Kind::ChooseAll:
        case Formula::Kind::ChooseEx:
        case Formula::Kind::Context: return contains_kind(f.body(), k);
        default: return false;
    }
}

// Evaluates sigma(var); variables the proof never constrained count as 0,
// the free move of the witness game.
std::uint64_t eval_defaulting(const Term& t, const Binding& sigma) {
    switch (t.kind()) {
        case Term::Kind::Nat: return t.nat_value();
        case Term::Kind::Var: {
            const Term* v = sigma.find(t.var_name());
            return v ? eval_defaulting(*v, sigma) : 0;
        }
        case Term::Kind::Succ: return eval_defaulting(t.succ_arg(), sigma) + 1;
        case Term::Kind::Plus:
            return eval_defaulting(t.plus_lhs(), sigma) + eval_defaulting(t.plus_rhs(), sigma);
    }
    return 0;
}

void collect_goal_vars(const Term& t, std::vector<std::string>& order,
                       std::set<std::string>& seen) {
    switch (t.kind()) {
        case Term::Kind::Nat: return;
        case Term::Kind::Var:
            if (seen.insert(t.var_name()).second) order.push_back(t.var_name());
            return;
        case Term::Kind::Succ: collect_goal_vars(t.succ_arg(), order, seen); return;
        case Term::Kind::Plus:
            collect_goal_vars(t.plus_lhs(), order, seen);
            collect_goal_vars(t.plus_rhs(), order, seen);
            return;
    }
}

// Witnesses for a goal's own variables, first-occurrence order, ground only.
std::vector<std::pair<std::string, std::uint64_t>> goal_witnesses(const Atom& goal,
                                                                  const Binding& sigma) {
    std::vector<std::string> order;
    std::set<std::string> seen;
    for (const auto& t : goal.args) collect_goal_vars(t, order, seen);
    std::vector<std::pair<std::string, std::uint64_t>> out;
    for (const auto& v : order) {
        Term t = apply_subst(Term::var(v), sigma);
        if (t.is_ground()) out.emplace_back(v, eval_term(t));
    }
    return out;
}

Clause rename_clause(const Clause& c, std::uint64_t k) {
    Binding rn;
    Clause out = c;
    out.vars.clear();
    for (const auto& v : c.vars) {
        std::string nv = v + "$" + std::to_string(k);
        rn.bind(v, Term::var(nv));
        out.vars.push_back(std::move(nv));
    }
    for (auto& b : out.body) b = apply_subst(b, rn);
    out.head = apply_subst(out.head, rn);
    return out;
}

// Mutable unification state for the backward chainer: a triangular
// substitution (a bound value may mention variables bound later) plus an undo
// trail, so a choice point costs one mark instead of one map copy.
class Trail {
public:
    std::size_t mark() const { return trail_.size(); }

    void undo(std::size_t m) {
        while (trail_.size() > m) {
            map_.erase(trail_.back());
            trail_.pop_back();
        }
    }

    // Caller guarantees var is unbound and value passed the occurs check.
    void bind(const std::string& var, Term value) {
        map_.emplace(var, std::move(value));
        trail_.push_back(var);
    }

    const Term* find(const std::string& var) const {
        auto it = map_.find(var);
        return it == map_.end() ? nullptr : &it->second;
    }

    std::optional<std::uint64_t> try_eval(const Term& t) const {
        switch (t.kind()) {
            case Term::Kind::Nat: return t.nat_value();
            case Term::Kind::Var: {
                const Term* v = find(t.var_name());
                return v ? try_eval(*v) : std::nullopt;
            }
            case Term::Kind::Succ: {
                auto a = try_eval(t.succ_arg());
                if (!a) return std::nullopt;
                return *a + 1;
            }
            case Term::Kind::Plus: {
                auto a = try_eval(t.plus_lhs());
                if (!a) return std::nullopt;
                auto b = try_eval(t.plus_rhs());
                if (!b) return std::nullopt;
                return *a + *b;
            }
        }
        return std::nullopt;
    }

    // Deep application with ground folding; the result mentions only unbound
    // variables.
    Term resolve(const Term& t) const {
        switch (t.kind()) {
            case Term::Kind::Nat: return t;
            case Term::Kind::Var: {
                const Term* v = find(t.var_name());
                return v ? resolve(*v) : t;
            }
            case Term::Kind::Succ:
            case Term::Kind::Plus: {
                if (auto g = try_eval(t)) return Term::nat(*g);
                if (t.kind() == Term::Kind::Succ) return Term::succ(resolve(t.succ_arg()));
                return Term::plus(resolve(t.plus_lhs()), resolve(t.plus_rhs()));
            }
        }
        return t;
    }

    Atom resolve(const Atom& a) const {
        Atom out = a;
        for (auto& t : out.args) t = resolve(t);
        return out;
    }

private:
    std::unordered_map<std::string, Term> map_;
    std::vector<std::string> trail_;
};

bool mentions(const Term& t, const std::string& var) {
    switch (t.kind()) {
        case Term::Kind::Nat: return false;
        case Term::Kind::Var: return t.var_name() == var;
        case Term::Kind::Succ: return mentions(t.succ_arg(), var);
        case Term::Kind::Plus:
            return mentions(t.plus_lhs(), var) || mentions(t.plus_rhs(), var);
    }
    return false;
}

// Delayed equalities: a concrete natural against a pattern that cannot be
// inverted yet (two variables, or a repeated one).
using Residuals = std::vector<std::pair<Term, std::uint64_t>>;

// Same meaning as the public unify, against the trail. Head unification
// passes residuals and may delay a value/pattern pair instead of failing;
// body-against-fact unification passes nullptr. Partial bindings on failure
// are the caller's to undo.
bool unify_on(Trail& tr, const Term& a, const Term& b, Residuals* residuals) {
    auto ea = tr.try_eval(a);
    auto eb = tr.try_eval(b);
    if (ea && eb) return *ea == *eb;
    if (ea || eb) {
        std::uint64_t n = ea ? *ea : *eb;
        Term pat = tr.resolve(ea ? b : a);
        auto lp = linear_decompose(pat);
        if (lp && lp->var) {
            if (n < lp->offset) return false;
            tr.bind(*lp->var, Term::nat(n - lp->offset));
            return true;
        }
        if (residuals) {
            residuals->emplace_back(std::move(pat), n);
            return true;
        }
        return false;
    }
    Term x = tr.resolve(a);
    Term y = tr.resolve(b);
    if (x.kind() == Term::Kind::Var && y.kind() == Term::Kind::Var &&
        x.var_name() == y.var_name())
        return true;
    if (x.kind() == Term::Kind::Var) {
        if (mentions(y, x.var_name())) return false;
        tr.bind(x.var_name(), std::move(y));
        return true;
    }
    if (y.kind() == Term::Kind::Var) {
        if (mentions(x, y.var_name())) return false;
        tr.bind(y.var_name(), std::move(x));
        return true;
    }
    auto lx = linear_decompose(x);
    auto ly = linear_decompose(y);
    if (!lx || !ly) return false;
    if (*lx->var == *ly->var) return lx->offset == ly->offset;
    const LinearPattern& low = lx->offset <= ly->offset ? *lx : *ly;
    const LinearPattern& high = lx->offset <= ly->offset ? *ly : *lx;
    std::uint64_t d = high.offset - low.offset;
    tr.bind(*low.var,
            d == 0 ? Term::var(*high.var) : Term::plus(Term::var(*high.var), Term::nat(d)));
    return true;
}

bool unify_on(Trail& tr, const Atom& a, const Atom& b, Residuals* residuals) {
    if (a.pred != b.pred || a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!unify_on(tr, a.args[i], b.args[i], residuals)) return false;
    return true;
}

struct SldItem {
    bool residual = false;
    Atom atom;                    // goal
    std::uint64_t depth = 0;      // proof-tree depth of the goal
    Term lhs = Term::nat(0);      // residual pattern
    std::uint64_t rhs = 0;        // residual value
};

struct Sld {
    const std::vector<StoreFact>& facts;
    const std::vector<Clause>& clauses;
    std::uint64_t limit;
    ProofTrace trace;
    Trail trail;
    std::uint64_t rename_k = 0;

    bool solve(const std::vector<SldItem>& goals, std::size_t i) {
        if (i == goals.size()) return true;
        const SldItem& item = goals[i];
        if (item.residual) {
            auto v = trail.try_eval(item.lhs);
            return v == item.rhs && solve(goals, i + 1);
        }
        for (const auto& f : facts) {
            std::size_t m = trail.mark();
            if (unify_on(trail, item.atom, f.atom, nullptr)) {
                std::size_t tmark = trace.steps.size();
                TraceStep st;
                st.kind = TraceStep::Kind::FactUse;
                st.atom = f.atom;
                st.origin = f.origin;
                trace.steps.push_back(std::move(st));
                if (solve(goals, i + 1)) return true;
                trace.steps.resize(tmark);
            }
            trail.undo(m);
        }
        for (const auto& c : clauses) {
            Clause rc = rename_clause(c, ++rename_k);
            std::size_t m = trail.mark();
            Residuals residuals;
            if (!unify_on(trail, rc.head, item.atom, &residuals)) {
                trail.undo(m);
                continue;
            }
            if (item.depth + 1 > limit)
                throw DepthExceeded("resolution depth limit " + std::to_string(limit) +
                                    " exceeded on " + pretty(trail.resolve(item.atom)));
            std::size_t tmark = trace.steps.size();
            TraceStep st;
            st.kind = TraceStep::Kind::Resolution;
            st.clause = c;
            st.atom = trail.resolve(item.atom);
            trace.steps.push_back(std::move(st));
            std::vector<SldItem> next;
            next.reserve(rc.body.size() + residuals.size() + goals.size() - i - 1);
            for (auto& b : rc.body) {
                SldItem gi;
                gi.atom = std::move(b);
                gi.depth = item.depth + 1;
                next.push_back(std::move(gi));
            }
            for (auto& [lhs, rhs] : residuals) {
                SldItem ri;
                ri.residual = true;
                ri.lhs = std::move(lhs);
                ri.rhs = rhs;
                next.push_back(std::move(ri));
            }
            next.insert(next.end(), goals.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                        goals.end());
            if (solve(next, 0)) return true;
            trace.steps.resize(tmark);
            trail.undo(m);
        }
        return false;
    }
};

}  // namespace

std::size_t ProofTrace::firing_count() const {
    return static_cast<std::size_t>(
        std::count_if(steps.begin(), steps.end(), [](const TraceStep& s) {
            return s.kind == TraceStep::Kind::Firing;
        }));
}

std::string ProofTrace::to_text() const {
    std::ostringstream os;
    for (const auto& s : steps) {
        switch (s.kind) {
            case TraceStep::Kind::Firing: {
                os << "FIRE ";
                std::string sep;
                for (const auto& b : s.clause.body) {
                    os << sep << pretty(normalize_atom(apply_subst(b, s.binding)));
                    sep = " & ";
                }
                if (!s.clause.body.empty()) os << " -> ";
                os << pretty(normalize_atom(apply_subst(s.clause.head, s.binding)));
                os << " WITH {";
                sep.clear();
                for (const auto& v : s.clause.vars) {
                    Term t = apply_subst(Term::var(v), s.binding);
                    if (!t.is_ground()) continue;
                    os << sep << v << "=" << eval_term(t);
                    sep = ", ";
                }
                os << "} DERIVES " << pretty(s.atom) << "\n";
                break;
            }
            case TraceStep::Kind::Resolution:
                os << "RESOLVE " << pretty(s.atom) << " VIA " << pretty(clause_formula(s.clause))
                   << "\n";
                break;
            case TraceStep::Kind::FactUse:
                os << "USE " << pretty(s.atom) << " FROM " << s.origin << "\n";
                break;
            case TraceStep::Kind::Materialize:
                os << "MATERIALIZE " << pretty(s.path) << "\n";
                break;
            case TraceStep::Kind::MacroExpand:
                os << "MACRO " << pretty(s.path) << "\n";
                break;
        }
    }
    return os.str();
}

bool ProofTrace::well_founded() const {
    std::set<std::string> known;
    for (const auto& s : steps) {
        if (s.kind == TraceStep::Kind::FactUse) {
            known.insert(pretty(s.atom));
        } else if (s.kind == TraceStep::Kind::Firing) {
            for (const auto& b : s.clause.body)
                if (!known.count(pretty(normalize_atom(apply_subst(b, s.binding)))))
                    return false;
            known.insert(pretty(s.atom));
        }
    }
    return true;
}

SolveResult solve_buq(const Atom& goal, const std::vector<StoreFact>& facts,
                      const std::vector<Clause>& clauses, std::uint64_t depth_limit) {
    Sld sld{facts, clauses, depth_limit};
    std::vector<SldItem> goals(1);
    goals[0].atom = goal;
    SolveResult out;
    if (!sld.solve(goals, 0)) return out;
    out.answer.success = true;
    std::vector<std::string> order;
    std::set<std::string> seen;
    for (const auto& t : goal.args) collect_goal_vars(t, order, seen);
    for (const auto& v : order)
        if (auto val = sld.trail.try_eval(Term::var(v)))
            out.answer.witnesses.emplace_back(v, *val);
    out.trace = std::move(sld.trace);
    return out;
}

ChainResult chain_forward(const std::vector<StoreFact>& facts0,
                          const std::vector<Clause>& clauses, const std::optional<Atom>& goal,
                          std::uint64_t max_rounds) {
    ChainResult out;
    std::vector<StoreFact> facts = facts0;
    std::vector<std::uint64_t> birth(facts.size(), 0);
    std::set<std::string> seen;
    std::set<std::string> traced;

    auto reach_goal = [&](const Atom& fact) {
        if (!goal) return false;
        auto s = unify(*goal, fact, {});
        if (!s) return false;
        out.answer.success = true;
        out.answer.witnesses = goal_witnesses(*goal, *s);
        return true;
    };

    for (const auto& f : facts) {
        seen.insert(pretty(f.atom));
        if (reach_goal(f.atom)) return out;
    }

    for (std::uint64_t round = 1; round <= max_rounds; ++round) {
        std::size_t visible = facts.size();
        bool added = false;
        bool done = false;
        for (const auto& c : clauses) {
            // Join the body left to right over facts visible at round start.
            std::function<bool(std::size_t, const Binding&, std::uint64_t,
                               std::vector<std::size_t>&)>
                join = [&](std::size_t j, const Binding& sigma, std::uint64_t maxbirth,
                           std::vector<std::size_t>& premises) -> bool {
                if (j == c.body.size()) {
                    if (round > 1 && maxbirth + 1 < round) return false;  // seen in full before
                    Atom head = normalize_atom(apply_subst(c.head, sigma));
                    if (!head.is_ground()) return false;
                    std::string key = pretty(head);
                    if (seen.count(key)) return false;
                    for (std::size_t idx : premises) {
                        const StoreFact& pf = facts[idx];
                        if (!traced.insert(pretty(pf.atom)).second) continue;
                        TraceStep use;
                        use.kind = TraceStep::Kind::FactUse;
                        use.atom = pf.atom;
                        use.origin = pf.origin;
                        out.trace.steps.push_back(std::move(use));
                    }
                    TraceStep fire;
                    fire.kind = TraceStep::Kind::Firing;
                    fire.clause = c;
                    fire.binding = sigma;
                    fire.atom = head;
                    out.trace.steps.push_back(std::move(fire));
                    traced.insert(key);
                    seen.insert(key);
                    facts.push_back({head, "derived"});
                    birth.push_back(round);
                    out.derived.push_back(head);
                    added = true;
                    return reach_goal(head);
                }
                Atom b = apply_subst(c.body[j], sigma);
                for (std::size_t idx = 0; idx < visible; ++idx) {
                    auto s2 = unify(b, facts[idx].atom, sigma);
                    if (!s2) continue;
                    premises.push_back(idx);
                    if (join(j + 1, *s2, std::max(maxbirth, birth[idx]), premises)) return true;
                    premises.pop_back();
                }
                return false;
            };
            std::vector<std::size_t> premises;
            if (join(0, {}, 0, premises)) {
                done = true;
                break;
            }
        }
        if (done) return out;
        if (!added) {
            // Quiescent. Without a goal that is success; with one it is failure.
            out.answer.success = !goal.has_value();
            return out;
        }
    }
    throw RoundsExceeded("forward chaining did not settle within " +
                         std::to_string(max_rounds) + " rounds");
}

Engine::Engine(Registry& reg, Limits limits) : reg_(reg), limits_(limits) {}

Engine::Store Engine::global_store() const {
    Store s;
    s.facts = reg_.global_facts;
    for (const auto& c : reg_.global_rules)
        (c.kind == Clause::Kind::PUQ ? s.puq : s.buq).push_back(c);
    for (const auto& f : s.facts) s.seen.insert(pretty(f.atom));
    return s;
}

Answer Engine::resolve_query(const Formula& query, const std::vector<std::uint64_t>& args) {
    trace_ = ProofTrace{};
    traced_atoms_.clear();
    witnesses_.clear();
    args_ = args;
    next_arg_ = 0;
    std::set<std::string> fv;
    free_vars(query, fv);
    if (!fv.empty()) {
        std::string names;
        for (const auto& v : fv) names += (names.empty() ? "" : ", ") + v;
        throw SolveFailure("query has free variables: " + names);
    }
    Store store = global_store();
    Binding sigma;
    Answer a;
    a.success = prove(query, sigma, store, 0);
    if (a.success)
        for (const auto& w : witnesses_) a.witnesses.emplace_back(w.display, w.value);
    return a;
}

bool Engine::prove(const Formula& f, Binding& sigma, Store& store, std::size_t quant_depth) {
    using K = Formula::Kind;
    switch (f.kind()) {
        case K::Atom: return prove_atom(f.atom_value(), sigma, store);
        case K::Conj:
            for (const auto& p : f.parts())
                if (!prove(p, sigma, store, quant_depth)) return false;
            return true;
        case K::Context: {
            std::vector<AgentPath> ctx;
            for (const auto& p : f.context()) {
                AgentPath gp = normalize_path(apply_subst(p, sigma));
                if (!gp.is_ground())
                    throw SolveFailure("context path " + pretty(p) + " is not ground");
                ctx.push_back(std::move(gp));
            }
            std::vector<Atom> kernel;
            kernel_atoms(f.body(), kernel);
            for (auto& a : kernel) a = normalize_atom(apply_subst(a, sigma));
            Store sub = pool(ctx, kernel);
            return prove(f.body(), sigma, sub, quant_depth);
        }
        case K::ChooseEx: {
            std::string v = f.var();
            Formula body = f.body();
            if (sigma.contains(v)) {
                std::string nv = v + "$" + fresh_suffix();
                Binding rn;
                rn.bind(v, Term::var(nv));
                body = apply_subst(body, rn);
                v = std::move(nv);
            }
            std::size_t slot = witnesses_.size();
            witnesses_.push_back({f.var(), 0});
            if (!prove(body, sigma, store, quant_depth + 1)) return false;
            witnesses_[slot].value = eval_defaulting(Term::var(v), sigma);
            return true;
        }
        case K::ChooseAll: {
            std::string v = f.var();
            Formula body = f.body();
            if (sigma.contains(v)) {
                std::string nv = v + "$" + fresh_suffix();
                Binding rn;
                rn.bind(v, Term::var(nv));
                body = apply_subst(body, rn);
                v = std::move(nv);
            }
            if (next_arg_ >= args_.size())
                throw MissingArgument("no argument supplied for '" + f.var() + "'", f.var());
            sigma.bind(v, Term::nat(args_[next_arg_++]));
            return prove(body, sigma, store, quant_depth + 1);
        }
        case K::Macro: {
            AgentPath gp = normalize_path(apply_subst(f.macro_path(), sigma));
            if (!gp.is_ground())
                throw SolveFailure("macro path " + pretty(f.macro_path()) + " is not ground");
            AgentKey key = key_of(gp);
            if (macro_unfolding_.count(key))
                throw CycleError("macro cycle at " + pretty(gp), pretty(gp));
            macro_unfolding_.insert(key);
            TraceStep st;
            st.kind = TraceStep::Kind::MacroExpand;
            st.path = gp;
            trace_.steps.push_back(std::move(st));
            bool ok = false;
            try {
                AgentEntry& e = materialize(gp);
                ok = prove(e.knowledge, sigma, store, quant_depth);
            } catch (...) {
                macro_unfolding_.erase(key);
                throw;
            }
            macro_unfolding_.erase(key);
            return ok;
        }
        case K::Impl:
        case K::Blind: throw SolveFailure("not a query form: " + pretty(f));
    }
    return false;
}

bool Engine::prove_atom(const Atom& goal, Binding& sigma, Store& store) {
    Atom g = normalize_atom(apply_subst(goal, sigma));
    if (!store.puq.empty() && chain_in_place(store, g, sigma)) return true;
    SolveResult sr = solve_buq(g, store.facts, store.buq, limits_.depth);
    for (const auto& s : sr.trace.steps) {
        if (s.kind == TraceStep::Kind::FactUse)
            record_fact_use(s.atom, s.origin);
        else
            trace_.steps.push_back(s);
    }
    if (!sr.answer.success) return false;
    for (const auto& [v, n] : sr.answer.witnesses) sigma.bind(v, Term::nat(n));
    return true;
}

bool Engine::chain_in_place(Store& store, const Atom& goal, Binding& sigma) {
    ChainResult cr = chain_forward(store.facts, store.puq, goal, limits_.rounds);
    for (const auto& s : cr.trace.steps) {
        if (s.kind == TraceStep::Kind::FactUse) {
            record_fact_use(s.atom, s.origin);
        } else {
            if (s.kind == TraceStep::Kind::Firing) note_traced(s.atom);
            trace_.steps.push_back(s);
        }
    }
    for (const auto& a : cr.derived) add_fact(store, a, "derived");
    if (!cr.answer.success) return false;
    for (const auto& [v, n] : cr.answer.witnesses) sigma.bind(v, Term::nat(n));
    return true;
}

Engine::Store Engine::pool(const std::vector<AgentPath>& ctx,
                           const std::vector<Atom>& goal_kernel) {
    Store store;
    std::set<AgentKey> macro_seen;
    for (const auto& p : ctx) {
        AgentEntry& e = materialize(p);
        contribute(e, store, goal_kernel, macro_seen);
    }
    return store;
}

void Engine::contribute(const AgentEntry& entry, Store& store,
                        const std::vector<Atom>& goal_kernel, std::set<AgentKey>& macro_seen) {
    // An agent reached twice through macros contributes once.
    if (!macro_seen.insert(key_of(entry.path)).second) return;
    std::string origin = pretty(entry.path);
    for (const auto& a : entry.lemmas) add_fact(store, a, origin);
    std::function<void(const Formula&, const std::vector<std::string>&)> walk =
        [&](const Formula& f, const std::vector<std::string>& blind) {
            switch (f.kind()) {
                case Formula::Kind::Atom: {
                    const Atom& a = f.atom_value();
                    if (blind.empty() && a.is_ground()) {
                        add_fact(store, normalize_atom(a), origin);
                    } else {
                        Clause c;
                        c.kind = entry.origin.from_class ? Clause::Kind::PUQ : Clause::Kind::BUQ;
                        c.vars = blind;
                        c.head = a;
                        c.origin = origin;
                        add_clause(store, std::move(c));
                    }
                    return;
                }
                case Formula::Kind::Conj:
                    for (const auto& p : f.parts()) walk(p, blind);
                    return;
                case Formula::Kind::Impl: {
                    std::vector<Atom> body;
                    bool flat = true;
                    if (f.body().kind() == Formula::Kind::Atom) {
                        body.push_back(f.body().atom_value());
                    } else if (f.body().kind() == Formula::Kind::Conj) {
                        for (const auto& p : f.body().parts()) {
                            if (p.kind() != Formula::Kind::Atom) {
                                flat = false;
                                break;
                            }
                            body.push_back(p.atom_value());
                        }
                    } else {
                        flat = false;
                    }
                    if (!flat) return;
                    Clause c;
                    c.kind = entry.origin.from_class ? Clause::Kind::PUQ : Clause::Kind::BUQ;
                    c.vars = blind;
                    c.body = std::move(body);
                    c.head = f.head();
                    c.origin = origin;
                    add_clause(store, std::move(c));
                    return;
                }
                case Formula::Kind::Blind: {
                    std::vector<std::string> inner = blind;
                    inner.insert(inner.end(), f.vars().begin(), f.vars().end());
                    walk(f.body(), inner);
                    return;
                }
                case Formula::Kind::Context:
                    if (contains_kind(f.body(), Formula::Kind::ChooseEx) ||
                        contains_kind(f.body(), Formula::Kind::ChooseAll))
                        delegate(entry, f, store, goal_kernel);
                    else
                        walk(f.body(), blind);
                    return;
                case Formula::Kind::ChooseAll:
                case Formula::Kind::ChooseEx: delegate(entry, f, store, goal_kernel); return;
                case Formula::Kind::Macro: {
                    AgentPath gp = normalize_path(f.macro_path());
                    AgentEntry& target = materialize(gp);
                    contribute(target, store, goal_kernel, macro_seen);
                    return;
                }
            }
        };
    walk(entry.knowledge, {});
}

void Engine::delegate(const AgentEntry& entry, const Formula& f, Store& store,
                      const std::vector<Atom>& goal_kernel) {
    // Strip leading environment choices, binding each from the goal kernel.
    Formula g = f;
    while (g.kind() == Formula::Kind::ChooseAll) {
        std::string nv = g.var() + "$" + fresh_suffix();
        Binding rn;
        rn.bind(g.var(), Term::var(nv));
        Formula body = apply_subst(g.body(), rn);
        std::vector<Atom> agent_kernel;
        kernel_atoms(body, agent_kernel);
        std::optional<std::uint64_t> value;
        for (const auto& ga : goal_kernel) {
            for (const auto& aa : agent_kernel) {
                auto s = unify(aa, ga, {});
                if (!s) continue;
                const Term* t = s->find(nv);
                if (!t) continue;
                Term r = apply_subst(*t, *s);
                if (!r.is_ground()) continue;
                value = eval_term(r);
                break;
            }
            if (value) break;
        }
        if (!value) return;  // the goal does not pin this choice down
        Binding bv;
        bv.bind(nv, Term::nat(*value));
        g = apply_subst(body, bv);
    }
    // Sub-proof in its own witness scope; the delegating agent answers from
    // its own knowledge, so the store starts from the global one.
    std::vector<WitnessSlot> saved_w = std::move(witnesses_);
    std::vector<std::uint64_t> saved_args = std::move(args_);
    std::size_t saved_next = next_arg_;
    witnesses_.clear();
    args_.clear();
    next_arg_ = 0;
    bool ok = false;
    Binding sigma;
    try {
        Store sub = global_store();
        ok = prove(g, sigma, sub, 0);
    } catch (...) {
        witnesses_ = std::move(saved_w);
        args_ = std::move(saved_args);
        next_arg_ = saved_next;
        throw;
    }
    witnesses_ = std::move(saved_w);
    args_ = std::move(saved_args);
    next_arg_ = saved_next;
    if (!ok) return;
    std::vector<Atom> kas;
    kernel_atoms(g, kas);
    for (const auto& a : kas) {
        Atom w = normalize_atom(apply_subst(a, sigma));
        if (w.is_ground()) add_fact(store, w, pretty(entry.path));
    }
}

void Engine::add_fact(Store& store, const Atom& atom, const std::string& origin) {
    if (!store.seen.insert(pretty(atom)).second) return;
    store.facts.push_back({atom, origin});
}

void Engine::add_clause(Store& store, Clause clause) {
    (clause.kind == Clause::Kind::PUQ ? store.puq : store.buq).push_back(std::move(clause));
}

AgentEntry& Engine::materialize(const AgentPath& path) {
    AgentPath gp = normalize_path(path);
    if (!gp.is_ground()) throw SolveFailure("agent path " + pretty(path) + " is not ground");
    AgentKey key = key_of(gp);
    if (materialize_depth_ + 1 > limits_.depth)
        throw DepthExceeded("materialization depth limit exceeded at " + pretty(gp));
    ++materialize_depth_;
    struct Guard {
        std::uint64_t& d;
        ~Guard() { --d; }
    } guard{materialize_depth_};

    auto it = reg_.agents.find(key);
    if (it != reg_.agents.end()) {
        AgentEntry& e = it->second;
        if (e.status == AgentStatus::Checking)
            throw CycleError("agent " + pretty(gp) + " depends on its own materialization",
                             pretty(gp));
        if (e.status == AgentStatus::Declared) {
            TraceStep st;
            st.kind = TraceStep::Kind::Materialize;
            st.path = e.path;
            trace_.steps.push_back(std::move(st));
            e.status = AgentStatus::Materialized;
        }
        return e;
    }
    LookupResult lr = lookup(reg_, gp);
    if (!lr.cls) throw AbsentAgent("no agent at " + pretty(gp), pretty(gp));
    ClassEntry& ce = reg_.classes[lr.cls->class_pos];
    TraceStep st;
    st.kind = TraceStep::Kind::Materialize;
    st.path = gp;
    trace_.steps.push_back(std::move(st));
    Binding bv;
    bv.bind(ce.decl.var, Term::nat(lr.cls->var_value));
    Formula knowledge = normalize_formula(apply_subst(ce.decl.tmpl.knowledge, bv));
    ce.consumed.insert(lr.cls->var_value);
    AgentEntry fresh{gp, knowledge};
    fresh.status = AgentStatus::Checking;
    fresh.origin = AgentOrigin{true, lr.cls->class_pos, lr.cls->var_value};
    AgentEntry& e = reg_.agents.emplace(key, std::move(fresh)).first->second;
    if (contains_kind(knowledge, Formula::Kind::ChooseEx) &&
        !contains_kind(knowledge, Formula::Kind::ChooseAll)) {
        // Query-shaped knowledge: the instance must establish it on creation.
        // Its witnessed atoms become the stored knowledge, memoizing the work.
        std::vector<WitnessSlot> saved_w = std::move(witnesses_);
        std::vector<std::uint64_t> saved_args = std::move(args_);
        std::size_t saved_next = next_arg_;
        witnesses_.clear();
        args_.clear();
        next_arg_ = 0;
        bool ok = false;
        std::vector<Atom> ground;
        try {
            Store sub = global_store();
            Binding sigma;
            ok = prove(knowledge, sigma, sub, 0);
            if (ok) {
                std::vector<Atom> kas;
                kernel_atoms(knowledge, kas);
                for (const auto& a : kas) {
                    Atom w = normalize_atom(apply_subst(a, sigma));
                    if (w.is_ground()) ground.push_back(std::move(w));
                }
                ok = !ground.empty();
            }
        } catch (...) {
            witnesses_ = std::move(saved_w);
            args_ = std::move(saved_args);
            next_arg_ = saved_next;
            reg_.agents.erase(key);
            throw;
        }
        witnesses_ = std::move(saved_w);
        args_ = std::move(saved_args);
        next_arg_ = saved_next;
        if (!ok) {
            reg_.agents.erase(key);
            throw SolveFailure("cannot establish knowledge of " + pretty(gp));
        }
        e.lemmas = ground;
        if (ground.size() == 1) {
            e.knowledge = Formula::atom(ground[0]);
        } else {
            std::vector<Formula> parts;
            parts.reserve(ground.size());
            for (const auto& a : ground) parts.push_back(Formula::atom(a));
            e.knowledge = Formula::conj(std::move(parts));
        }
    }
    e.status = AgentStatus::Materialized;
    return e;
}

Formula Engine::expand_macro(const AgentPath& path) {
    std::set<AgentKey> visited;
    return expand_rec(path, visited);
}

Formula Engine::expand_rec(const AgentPath& path, std::set<AgentKey>& visited) {
    AgentPath gp = normalize_path(path);
    if (!gp.is_ground()) throw SolveFailure("agent path " + pretty(path) + " is not ground");
    AgentKey key = key_of(gp);
    if (!visited.insert(key).second)
        throw CycleError("macro cycle at " + pretty(gp), pretty(gp));
    Formula knowledge = [&]() -> Formula {
        auto it = reg_.agents.find(key);
        if (it != reg_.agents.end()) return it->second.knowledge;
        LookupResult lr = lookup(reg_, gp);
        if (!lr.cls) throw AbsentAgent("no agent at " + pretty(gp), pretty(gp));
        const ClassEntry& ce = reg_.classes[lr.cls->class_pos];
        Binding bv;
        bv.bind(ce.decl.var, Term::nat(lr.cls->var_value));
        return normalize_formula(apply_subst(ce.decl.tmpl.knowledge, bv));
    }();
    TraceStep st;
    st.kind = TraceStep::Kind::MacroExpand;
    st.path = gp;
    trace_.steps.push_back(std::move(st));
    std::function<Formula(const Formula&)> walk = [&](const Formula& f) -> Formula {
        switch (f.kind()) {
            case Formula::Kind::Atom: return f;
            case Formula::Kind::Conj: {
                std::vector<Formula> parts;
                parts.reserve(f.parts().size());
                for (const auto& p : f.parts()) parts.push_back(walk(p));
                return Formula::conj(std::move(parts));
            }
            case Formula::Kind::Impl: return Formula::impl(walk(f.body()), f.head());
            case Formula::Kind::Blind: return Formula::blind(f.vars(), walk(f.body()));
            case Formula::Kind::ChooseAll: return Formula::choose_all(f.var(), walk(f.body()));
            case Formula::Kind::ChooseEx: return Formula::choose_ex(f.var(), walk(f.body()));
            case Formula::Kind::Context:
                return Formula::with_context(walk(f.body()), f.context());
            case Formula::Kind::Macro: return expand_rec(f.macro_path(), visited);
        }
        return f;
    };
    Formula out = walk(knowledge);
    visited.erase(key);
    return out;
}

void Engine::record_fact_use(const Atom& atom, const std::string& origin) {
    if (already_traced(atom)) return;
    TraceStep st;
    st.kind = TraceStep::Kind::FactUse;
    st.atom = atom;
    st.origin = origin;
    trace_.steps.push_back(std::move(st));
    note_traced(atom);
}

void Engine::note_traced(const Atom& atom) { traced_atoms_.insert(pretty(atom)); }

bool Engine::already_traced(const Atom& atom) const { return traced_atoms_.count(pretty(atom)); }

std::string Engine::fresh_suffix() { return std::to_string(++fresh_counter_); }

}  // namespace colweb
