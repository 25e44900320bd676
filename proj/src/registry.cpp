#include "colweb/registry.hpp"

#include <sstream>

#include "colweb/errors.hpp"
#include "colweb/pretty.hpp"

namespace colweb {

AgentKey key_of(const AgentPath& ground_path) {
    AgentKey k;
    k.name = ground_path.name;
    if (ground_path.index) k.index = eval_term(*ground_path.index);
    return k;
}

namespace {

std::optional<std::vector<Atom>> body_atoms(const Formula& f) {
    if (f.kind() == Formula::Kind::Atom) return std::vector<Atom>{f.atom_value()};
    if (f.kind() != Formula::Kind::Conj) return std::nullopt;
    std::vector<Atom> out;
    for (const auto& p : f.parts()) {
        if (p.kind() != Formula::Kind::Atom) return std::nullopt;
        out.push_back(p.atom_value());
    }
    return out;
}

// Store-like pieces of a plain agent's knowledge: ground atoms become global
// facts, (blind) implications become BUQ rules. Annotated, choice-quantified,
// and macro knowledge stays local to its agent.
void flatten_plain(const Formula& f, const std::string& origin,
                   const std::vector<std::string>& vars, Registry& r) {
    using K = Formula::Kind;
    switch (f.kind()) {
        case K::Atom:
            if (vars.empty() && f.atom_value().is_ground())
                r.global_facts.push_back({normalize_atom(f.atom_value()), origin});
            else
                r.global_rules.push_back(
                    {Clause::Kind::BUQ, vars, {}, f.atom_value(), origin});
            return;
        case K::Conj:
            for (const auto& p : f.parts()) flatten_plain(p, origin, vars, r);
            return;
        case K::Impl: {
            auto body = body_atoms(f.body());
            if (!body) return;
            r.global_rules.push_back({Clause::Kind::BUQ, vars, *body, f.head(), origin});
            return;
        }
        case K::Blind: {
            auto inner = vars;
            inner.insert(inner.end(), f.vars().begin(), f.vars().end());
            flatten_plain(f.body(), origin, inner, r);
            return;
        }
        default: return;
    }
}

// A class family contributes to the global store only when its template is
// rule-shaped: an optional blind quantifier over an implication (a PUQ rule,
// one instance per index) or over a single atom (a BUQ axiom scheme).
void flatten_class(const ClassDecl& c, Registry& r) {
    std::vector<std::string> vars{c.var};
    const Formula* f = &c.tmpl.knowledge;
    if (f->kind() == Formula::Kind::Blind) {
        vars.insert(vars.end(), f->vars().begin(), f->vars().end());
        f = &f->body();
    }
    std::string origin = pretty(c.tmpl.path);
    if (f->kind() == Formula::Kind::Impl) {
        auto body = body_atoms(f->body());
        if (!body) return;
        r.global_rules.push_back({Clause::Kind::PUQ, vars, *body, f->head(), origin});
    } else if (f->kind() == Formula::Kind::Atom) {
        r.global_rules.push_back({Clause::Kind::BUQ, vars, {}, f->atom_value(), origin});
    }
}

std::string join_vars(const std::set<std::string>& vs) {
    std::string out;
    for (const auto& v : vs) {
        if (!out.empty()) out += ", ";
        out += v;
    }
    return out;
}

}  // namespace

Registry load(const Program& program) {
    Registry r;
    for (const auto& d : program.decls) {
        if (std::holds_alternative<Declaration>(d)) {
            const auto& decl = std::get<Declaration>(d);
            if (decl.path.index && !decl.path.index->is_ground())
                throw LoadError("agent " + pretty(decl.path) + " has a non-ground index");
            std::set<std::string> fv;
            free_vars(decl.knowledge, fv);
            if (!fv.empty())
                throw LoadError("agent " + pretty(decl.path) +
                                " has free variables: " + join_vars(fv));
            AgentPath npath = normalize_path(decl.path);
            AgentKey key = key_of(npath);
            if (r.agents.count(key))
                throw DuplicateAgent("duplicate agent " + pretty(npath), pretty(npath));
            AgentEntry e{npath, decl.knowledge};
            std::string origin = pretty(npath);
            r.agents.emplace(std::move(key), std::move(e));
            r.declared_order.push_back(key_of(npath));
            flatten_plain(decl.knowledge, origin, {}, r);
        } else {
            const auto& c = std::get<ClassDecl>(d);
            std::string label = pretty(c.tmpl.path);
            if (!c.tmpl.path.index)
                throw LoadError("class template " + label + " must have an index pattern");
            auto lp = linear_decompose(*c.tmpl.path.index);
            if (!lp || !lp->var || *lp->var != c.var)
                throw LoadError("class template " + label +
                                " index pattern must be linear in " + c.var);
            std::set<std::string> fv;
            free_vars(c.tmpl.knowledge, fv);
            fv.erase(c.var);
            if (!fv.empty())
                throw LoadError("class template " + label +
                                " has free variables besides " + c.var + ": " + join_vars(fv));
            r.classes.push_back(ClassEntry{c.tmpl.path.name, c, {}});
            flatten_class(c, r);
        }
    }
    // Explicit indexed agents shadow the matching class instance: that index
    // is consumed up front, whatever the declaration order was.
    for (const auto& [key, entry] : r.agents) {
        if (!key.index) continue;
        for (auto& ce : r.classes) {
            if (ce.decl.tmpl.path.name != key.name) continue;
            auto m = match_index(*ce.decl.tmpl.path.index, *key.index);
            if (!m) continue;
            ce.consumed.insert(m->find(ce.decl.var)->nat_value());
        }
    }
    return r;
}

LookupResult lookup(const Registry& r, const AgentPath& path) {
    AgentKey key = key_of(path);
    auto it = r.agents.find(key);
    if (it != r.agents.end()) return {&it->second, std::nullopt};
    if (key.index) {
        for (std::size_t pos = 0; pos < r.classes.size(); ++pos) {
            const auto& ce = r.classes[pos];
            if (ce.decl.tmpl.path.name != key.name) continue;
            auto m = match_index(*ce.decl.tmpl.path.index, *key.index);
            if (!m) continue;
            std::uint64_t value = m->find(ce.decl.var)->nat_value();
            if (value < ce.decl.lower) continue;
            return {nullptr, ClassMatch{pos, value, *m}};
        }
    }
    return {nullptr, std::nullopt};
}

std::uint64_t residual_lower(const Registry& r, std::size_t class_pos) {
    if (class_pos >= r.classes.size()) throw Error("class position out of range");
    const ClassEntry& ce = r.classes[class_pos];
    std::uint64_t n = ce.decl.lower;
    while (ce.consumed.count(n)) ++n;
    return n;
}

std::uint64_t residual_lower(const Registry& r, const std::string& class_id) {
    for (std::size_t pos = 0; pos < r.classes.size(); ++pos)
        if (r.classes[pos].id == class_id) return residual_lower(r, pos);
    throw Error("unknown class '" + class_id + "'");
}

std::string snapshot(const Registry& r) {
    std::ostringstream os;
    for (const auto& [key, entry] : r.agents)
        os << pretty(Declaration{entry.path, entry.knowledge}) << "\n";
    for (std::size_t pos = 0; pos < r.classes.size(); ++pos) {
        const ClassEntry& ce = r.classes[pos];
        std::uint64_t rl = residual_lower(r, pos);
        os << "wedge " << ce.decl.var << " from " << rl << ": " << pretty(ce.decl.tmpl)
           << "\n";
        std::string gaps;
        for (std::uint64_t c : ce.consumed) {
            if (c <= rl) continue;
            if (!gaps.empty()) gaps += ", ";
            gaps += std::to_string(c);
        }
        if (!gaps.empty()) os << "# consumed: " << gaps << "\n";
    }
    return os.str();
}

}  // namespace colweb
