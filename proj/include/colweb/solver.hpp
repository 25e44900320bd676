#pragma once

// Query evaluation. solve_buq and chain_forward are pure store-level
// operations; Engine drives full queries against a registry, materializing
// class instances on demand (which is where memoization happens).

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "colweb/ast.hpp"
#include "colweb/registry.hpp"
#include "colweb/terms.hpp"

namespace colweb {

struct Limits {
    std::uint64_t depth = 512;     // backward-chaining resolution depth
    std::uint64_t rounds = 10000;  // forward-chaining rounds
};

struct Answer {
    bool success = false;
    // ChooseEx witnesses, outermost-first.
    std::vector<std::pair<std::string, std::uint64_t>> witnesses;
};

struct TraceStep {
    enum class Kind { Firing, Resolution, FactUse, Materialize, MacroExpand };
    Kind kind;
    Clause clause;       // Firing, Resolution
    Binding binding;     // Firing instantiation / Resolution unifier
    Atom atom;           // Firing derived atom / Resolution goal / FactUse fact
    std::string origin;  // FactUse source label
    AgentPath path;      // Materialize, MacroExpand
};

struct ProofTrace {
    std::vector<TraceStep> steps;
    std::size_t firing_count() const;
    std::string to_text() const;
    // Every firing's premises appear earlier as a derived atom or a fact use.
    bool well_founded() const;
};

struct SolveResult {
    Answer answer;
    ProofTrace trace;
};

// Backward chaining (SLD) for a goal against facts and BUQ clauses. The store
// never grows. Throws DepthExceeded past depth_limit.
SolveResult solve_buq(const Atom& goal, const std::vector<StoreFact>& facts,
                      const std::vector<Clause>& clauses, std::uint64_t depth_limit);

struct ChainResult {
    std::vector<Atom> derived;
    Answer answer;
    ProofTrace trace;
};

// Semi-naive forward chaining over PUQ clauses. Stops at quiescence, when the
// goal (if given) becomes derivable, or at max_rounds; with a goal still open
// at the round limit it throws RoundsExceeded. Inputs are copied.
ChainResult chain_forward(const std::vector<StoreFact>& facts, const std::vector<Clause>& clauses,
                          const std::optional<Atom>& goal, std::uint64_t max_rounds);

// Evaluates closed query formulas against a registry. Context annotations
// pool the named agents' knowledge; queries without one run on the global
// store. ChooseAll variables take caller-supplied arguments, outermost-first,
// unless the goal itself fixes them. Materializations persist in the registry.
class Engine {
public:
    explicit Engine(Registry& reg, Limits limits = {});

    Answer resolve_query(const Formula& query, const std::vector<std::uint64_t>& args = {});

    // Returns the entry for a ground path, instantiating and, for queries
    // stored at class instances, evaluating it first. Idempotent.
    AgentEntry& materialize(const AgentPath& path);

    // Fully expands macro references starting at path, instantiating class
    // instances without evaluating them. Context annotations are preserved.
    Formula expand_macro(const AgentPath& path);

    const ProofTrace& trace() const { return trace_; }
    std::size_t firings() const { return trace_.firing_count(); }
    Limits& limits() { return limits_; }

private:
    struct WitnessSlot {
        std::string display;
        std::uint64_t value = 0;
    };

    struct Store {
        std::vector<StoreFact> facts;
        std::vector<Clause> buq;
        std::vector<Clause> puq;
        std::set<std::string> seen;  // pretty(atom) of pooled facts, for dedup
    };

    Store global_store() const;
    Store pool(const std::vector<AgentPath>& ctx, const std::vector<Atom>& goal_kernel);
    void contribute(const AgentEntry& entry, Store& store, const std::vector<Atom>& goal_kernel,
                    std::set<AgentKey>& macro_seen);
    void delegate(const AgentEntry& entry, const Formula& f, Store& store,
                  const std::vector<Atom>& goal_kernel);
    void add_fact(Store& store, const Atom& atom, const std::string& origin);
    void add_clause(Store& store, Clause clause);

    bool prove(const Formula& f, Binding& sigma, Store& store, std::size_t quant_depth);
    bool prove_atom(const Atom& goal, Binding& sigma, Store& store);
    // Forward chaining in place on store.facts; lemmas stay visible to later
    // goals of the same query. Returns true when the goal was reached.
    bool chain_in_place(Store& store, const Atom& goal, Binding& sigma);

    Formula expand_rec(const AgentPath& path, std::set<AgentKey>& visited);

    void record_fact_use(const Atom& atom, const std::string& origin);
    void note_traced(const Atom& atom);
    bool already_traced(const Atom& atom) const;

    std::string fresh_suffix();

    Registry& reg_;
    Limits limits_;
    ProofTrace trace_;
    std::set<std::string> traced_atoms_;
    std::vector<WitnessSlot> witnesses_;
    std::vector<std::uint64_t> args_;
    std::size_t next_arg_ = 0;
    std::uint64_t fresh_counter_ = 0;
    std::uint64_t materialize_depth_ = 0;
    std::set<AgentKey> macro_unfolding_;
};

}  // namespace colweb
