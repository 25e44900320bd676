#pragma once

// The knowledgebase: explicit agents, class agents with their consumed-index
// bookkeeping, and the flattened global store used by location-free queries.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "colweb/ast.hpp"
#include "colweb/terms.hpp"

namespace colweb {

// Key for the agent map: name lexicographic, then index numeric. Agents
// without an index sort before indexed ones of the same name.
struct AgentKey {
    std::string name;
    std::optional<std::uint64_t> index;
    auto operator<=>(const AgentKey&) const = default;
};

enum class AgentStatus { Declared, Checking, Materialized };

struct AgentOrigin {
    bool from_class = false;
    std::size_t class_pos = 0;     // position in Registry::classes
    std::uint64_t var_value = 0;   // class-variable value for this instance
};

struct AgentEntry {
    AgentPath path;
    Formula knowledge;
    AgentStatus status = AgentStatus::Declared;
    AgentOrigin origin;
    std::vector<Atom> lemmas;   // facts derived and stored here
};

struct ClassEntry {
    std::string id;
    ClassDecl decl;
    // Shadowed indices plus every index instantiated by materialize, exactly.
    std::set<std::uint64_t> consumed;
};

// A fact with a provenance label for traces.
struct StoreFact {
    Atom atom;
    std::string origin;
};

// Horn clause as used by the solver. BUQ clauses back-chain and never grow
// the store; PUQ clauses forward-chain and leave lemmas behind. A clause is
// PUQ when it comes from a class-level family over an implication or from a
// blind implication stored at a class-instance agent.
struct Clause {
    enum class Kind { BUQ, PUQ };
    Kind kind = Kind::BUQ;
    std::vector<std::string> vars;
    std::vector<Atom> body;
    Atom head;
    std::string origin;
};

struct Registry {
    std::map<AgentKey, AgentEntry> agents;
    std::vector<ClassEntry> classes;
    // Program read flat: facts and rules of every plain agent plus the
    // rule-shaped class families, in declaration order. Queries without a
    // context annotation run against this store.
    std::vector<StoreFact> global_facts;
    std::vector<Clause> global_rules;
    // Explicit declarations in program order, for reports.
    std::vector<AgentKey> declared_order;
};

AgentKey key_of(const AgentPath& ground_path);

struct ClassMatch {
    std::size_t class_pos = 0;
    std::uint64_t var_value = 0;
    Binding binding;
};

struct LookupResult {
    const AgentEntry* entry = nullptr;
    std::optional<ClassMatch> cls;
    bool absent() const { return entry == nullptr && !cls.has_value(); }
};

// Builds a registry from a parsed program. Explicit declarations that match a
// class template shadow that instance: its index is consumed immediately.
Registry load(const Program& program);

// Ground path -> explicit/materialized entry, else the first class (in
// declaration order) whose name and index pattern match. Never consumes.
LookupResult lookup(const Registry& r, const AgentPath& path);

// Smallest n >= lower that is not consumed.
std::uint64_t residual_lower(const Registry& r, std::size_t class_pos);
std::uint64_t residual_lower(const Registry& r, const std::string& class_id);

// Deterministic dump: agents in path order, then each class with
// "from residual_lower"; consumed indices above that lower bound are listed
// on a comment line. The dump re-parses into an equivalent registry.
std::string snapshot(const Registry& r);

}  // namespace colweb
