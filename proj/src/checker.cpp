#include "colweb/checker.hpp"

#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "colweb/errors.hpp"
#include "colweb/pretty.hpp"
#include "colweb/terms.hpp"

namespace colweb {

namespace {

enum class BinderKind { Ade, Ada, Cla };

struct BinderRef {
    BinderKind kind;
    std::string var;
};

using Unit = std::pair<Formula, std::vector<BinderRef>>;

// Outermost annotated subformulas, each with the quantifiers scoping over it.
void collect_units(const Formula& f, std::vector<BinderRef>& stack, std::vector<Unit>& out) {
    switch (f.kind()) {
        case Formula::Kind::Context: out.emplace_back(f, stack); return;
        case Formula::Kind::Conj:
            for (const auto& p : f.parts()) collect_units(p, stack, out);
            return;
        case Formula::Kind::Impl: collect_units(f.body(), stack, out); return;
        case Formula::Kind::Blind: {
            for (const auto& v : f.vars()) stack.push_back({BinderKind::Cla, v});
            collect_units(f.body(), stack, out);
            stack.resize(stack.size() - f.vars().size());
            return;
        }
        case Formula::Kind::ChooseAll:
        case Formula::Kind::ChooseEx: {
            stack.push_back({f.kind() == Formula::Kind::ChooseAll ? BinderKind::Ada
                                                                  : BinderKind::Ade,
                             f.var()});
            collect_units(f.body(), stack, out);
            stack.pop_back();
            return;
        }
        case Formula::Kind::Atom:
        case Formula::Kind::Macro: return;
    }
}

std::optional<Declaration> declaration_at(const Registry& r, const AgentPath& path) {
    AgentKey key = key_of(normalize_path(path));
    auto it = r.agents.find(key);
    if (it != r.agents.end()) return Declaration{it->second.path, it->second.knowledge};
    LookupResult lr = lookup(r, path);
    if (!lr.cls) return std::nullopt;
    const ClassEntry& ce = r.classes[lr.cls->class_pos];
    Binding bv;
    bv.bind(ce.decl.var, Term::nat(lr.cls->var_value));
    return Declaration{normalize_path(apply_subst(ce.decl.tmpl.path, bv)),
                       normalize_formula(apply_subst(ce.decl.tmpl.knowledge, bv))};
}

CheckEntry check_impl(Registry& r, const Declaration& d, Limits limits,
                      std::map<std::string, CheckEntry>& memo,
                      std::set<std::string>& in_progress) {
    std::string label = pretty(d.path);
    auto hit = memo.find(label);
    if (hit != memo.end()) return hit->second;
    if (!in_progress.insert(label).second) {
        CheckEntry ce{label, Verdict::Invalid, "cyclic dependency", 0};
        memo.emplace(label, ce);
        return ce;
    }

    std::vector<Unit> units;
    {
        std::vector<BinderRef> stack;
        collect_units(d.knowledge, stack, units);
    }

    CheckEntry result{label, Verdict::Skipped, "axiomatic", 0};
    bool any_valid = false;
    bool invalid = false;
    std::string skip_reason;
    for (const auto& [unit, binders] : units) {
        // Close the unit under its own ade binders; an ada or cla binder over
        // a variable the unit mentions leaves nothing concrete to check.
        std::set<std::string> needed;
        free_vars(unit, needed);
        Formula query = unit;
        bool blocked = false;
        for (auto it = binders.rbegin(); it != binders.rend() && !needed.empty(); ++it) {
            if (!needed.count(it->var)) continue;
            if (it->kind != BinderKind::Ade) {
                skip_reason = std::string("blocked by ") +
                              (it->kind == BinderKind::Ada ? "environment choice '"
                                                           : "blind quantifier '") +
                              it->var + "'";
                blocked = true;
                break;
            }
            query = Formula::choose_ex(it->var, query);
            needed.erase(it->var);
        }
        if (blocked) continue;
        // A claim is only as good as the agents it cites: check those first.
        for (const auto& p : unit.context()) {
            if (!p.is_ground()) continue;
            auto dep = declaration_at(r, p);
            if (!dep) continue;  // absence surfaces when the query resolves
            CheckEntry de = check_impl(r, *dep, limits, memo, in_progress);
            if (de.verdict == Verdict::Invalid) {
                result = CheckEntry{label, Verdict::Invalid,
                                    "depends on invalid agent " + de.path, 0};
                invalid = true;
                break;
            }
        }
        if (invalid) break;
        try {
            Engine eng(r, limits);
            Answer a = eng.resolve_query(query, {});
            if (a.success) {
                any_valid = true;
                result.trace_steps += eng.trace().steps.size();
            } else {
                result = CheckEntry{label, Verdict::Invalid,
                                    "cannot derive: " + pretty(query), 0};
                invalid = true;
                break;
            }
        } catch (const DepthExceeded& e) {
            result = CheckEntry{label, Verdict::Invalid,
                                std::string("inconclusive: ") + e.what(), 0};
            invalid = true;
            break;
        } catch (const RoundsExceeded& e) {
            result = CheckEntry{label, Verdict::Invalid,
                                std::string("inconclusive: ") + e.what(), 0};
            invalid = true;
            break;
        } catch (const Error& e) {
            result = CheckEntry{label, Verdict::Invalid, e.what(), 0};
            invalid = true;
            break;
        }
    }
    if (!invalid) {
        if (any_valid) {
            result.verdict = Verdict::Valid;
            result.reason.clear();
        } else if (!units.empty()) {
            result.verdict = Verdict::Skipped;
            result.reason = skip_reason.empty() ? "axiomatic" : skip_reason;
            result.trace_steps = 0;
        }
    }
    in_progress.erase(label);
    memo.emplace(label, result);
    return memo.at(label);
}

}  // namespace

std::string CheckReport::to_text() const {
    std::ostringstream os;
    for (const auto& e : entries) {
        os << e.path << ": ";
        switch (e.verdict) {
            case Verdict::Valid:
                os << "VALID - trace: " << e.trace_steps << " steps";
                break;
            case Verdict::Invalid: os << "INVALID - " << e.reason; break;
            case Verdict::Skipped: os << "SKIPPED - " << e.reason; break;
        }
        os << "\n";
    }
    os << "overall: " << (overall ? "valid" : "invalid") << "\n";
    return os.str();
}

std::string CheckReport::to_kv() const {
    std::ostringstream os;
    for (const auto& e : entries) {
        os << "path=" << e.path << "\tverdict="
           << (e.verdict == Verdict::Valid     ? "valid"
               : e.verdict == Verdict::Invalid ? "invalid"
                                               : "skipped")
           << "\ttrace_steps=" << e.trace_steps << "\treason=" << e.reason << "\n";
    }
    os << "overall=" << (overall ? "true" : "false") << "\n";
    return os.str();
}

CheckEntry check_declaration(Registry& r, const Declaration& d, Limits limits) {
    std::map<std::string, CheckEntry> memo;
    std::set<std::string> in_progress;
    return check_impl(r, d, limits, memo, in_progress);
}

CheckReport check_program(const Registry& r, std::uint64_t class_sample, Limits limits) {
    Registry copy = r;
    std::map<std::string, CheckEntry> memo;
    std::set<std::string> in_progress;
    std::vector<std::pair<std::string, Declaration>> plan;
    for (const auto& key : copy.declared_order) {
        const AgentEntry& e = copy.agents.at(key);
        plan.emplace_back(pretty(e.path), Declaration{e.path, e.knowledge});
    }
    for (const auto& ce : copy.classes) {
        std::uint64_t n = ce.decl.lower;
        for (std::uint64_t got = 0; got < class_sample; ++n) {
            if (ce.consumed.count(n)) continue;
            ++got;
            Binding bv;
            bv.bind(ce.decl.var, Term::nat(n));
            AgentPath ip = normalize_path(apply_subst(ce.decl.tmpl.path, bv));
            Formula ik = normalize_formula(apply_subst(ce.decl.tmpl.knowledge, bv));
            std::string label = pretty(ip);
            plan.emplace_back(std::move(label), Declaration{std::move(ip), std::move(ik)});
        }
    }
    CheckReport report;
    for (const auto& [label, d] : plan) {
        CheckEntry e = check_impl(copy, d, limits, memo, in_progress);
        report.entries.push_back(e);
        if (e.verdict == Verdict::Invalid) report.overall = false;
    }
    return report;
}

}  // namespace colweb
