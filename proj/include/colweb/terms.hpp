#pragma once

// Term-level machinery: evaluation of ground arithmetic, substitution,
// unification with an occurs check, and inversion of linear index patterns
// against concrete naturals. All functions here are pure; they can be called
// from any number of threads.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "colweb/ast.hpp"

namespace colweb {

// Idempotent substitution from variable names to terms.
class Binding {
public:
    bool contains(const std::string& var) const { return map_.find(var) != map_.end(); }
    const Term* find(const std::string& var) const;
    // Extends the substitution, keeping it idempotent. Returns false when the
    // occurs check rejects the pair.
    bool bind(const std::string& var, Term value);
    const std::map<std::string, Term>& entries() const { return map_; }
    bool empty() const { return map_.empty(); }
    std::size_t size() const { return map_.size(); }

    friend bool operator==(const Binding& a, const Binding& b) { return a.map_ == b.map_; }

private:
    std::map<std::string, Term> map_;
};

// Evaluates a term to a natural under the binding. Throws UnboundVariable if
// a variable stays free after substitution.
std::uint64_t eval_term(const Term& t, const Binding& b = {});

Term apply_subst(const Term& t, const Binding& b);
Atom apply_subst(const Atom& a, const Binding& b);
AgentPath apply_subst(const AgentPath& p, const Binding& b);
// Capture-avoiding: quantified variables shadow the binding and are renamed
// when a replacement term would capture them.
Formula apply_subst(const Formula& f, const Binding& b);

// Replaces every ground subterm by its value. Shape is otherwise preserved.
Term normalize_term(const Term& t);
Atom normalize_atom(const Atom& a);
AgentPath normalize_path(const AgentPath& p);
Formula normalize_formula(const Formula& f);

// Most general unifier of two atoms (or terms), seeded with an existing
// binding. Ground arguments are compared by value. A ground natural against a
// one-variable linear pattern (x, x+k, any Succ/Plus mix) is inverted, and
// two such patterns shift their offset difference onto each other; any other
// non-ground arithmetic pair fails rather than over-commit. Success always
// yields a unifier every solution satisfies; failure may be conservative.
std::optional<Binding> unify(const Atom& a, const Atom& b, Binding seed = {});
std::optional<Binding> unify_terms(const Term& a, const Term& b, Binding seed = {});

// Decides whether pattern matches the concrete natural n and, if the pattern
// is var+k, returns {var -> n-k}. Patterns with two or more variables throw
// UnsupportedPattern; a plain mismatch returns nullopt.
std::optional<Binding> match_index(const Term& pattern, std::uint64_t n);

// Linear view of a term: either ground (no var) or var + offset.
struct LinearPattern {
    std::optional<std::string> var;
    std::uint64_t offset = 0;
};
// nullopt when the term mentions two variables or one variable twice.
std::optional<LinearPattern> linear_decompose(const Term& t);

void free_vars(const Term& t, std::set<std::string>& out);
void free_vars(const Atom& a, std::set<std::string>& out);
void free_vars(const AgentPath& p, std::set<std::string>& out);
// Respects binders: quantified variables are not free in their body.
void free_vars(const Formula& f, std::set<std::string>& out);

}  // namespace colweb
