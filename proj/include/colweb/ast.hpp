#pragma once

// Surface syntax tree for the colweb language: terms over naturals,
// Horn-style formulas with choice quantifiers, agent paths, and programs.
// Nodes are immutable and share structure, so copies are cheap.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace colweb {

class Term {
public:
    enum class Kind { Nat, Var, Succ, Plus };

    static Term nat(std::uint64_t value);
    static Term var(std::string name);
    static Term succ(Term arg);
    static Term plus(Term lhs, Term rhs);

    Kind kind() const { return kind_; }
    std::uint64_t nat_value() const { return nat_; }
    const std::string& var_name() const { return var_; }
    const Term& succ_arg() const { return *a_; }
    const Term& plus_lhs() const { return *a_; }
    const Term& plus_rhs() const { return *b_; }

    bool is_ground() const;
    friend bool operator==(const Term& a, const Term& b);
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

private:
    Kind kind_ = Kind::Nat;
    std::uint64_t nat_ = 0;
    std::string var_;
    std::shared_ptr<const Term> a_, b_;
};

struct Atom {
    std::string pred;
    std::vector<Term> args;

    friend bool operator==(const Atom& a, const Atom& b) {
        return a.pred == b.pred && a.args == b.args;
    }
    friend bool operator!=(const Atom& a, const Atom& b) { return !(a == b); }
    bool is_ground() const;
};

// Agent location: /name or /name[t]. Two paths are equal when the names match
// and the index terms denote the same natural (or both are absent).
struct AgentPath {
    std::string name;
    std::optional<Term> index;

    bool is_ground() const;
    friend bool operator==(const AgentPath& a, const AgentPath& b);
    friend bool operator!=(const AgentPath& a, const AgentPath& b) { return !(a == b); }
};

class Formula;

struct FormulaNode;

class Formula {
public:
    enum class Kind {
        Atom,        // predicate application
        Conj,        // f1 & f2 & ...
        Impl,        // body -> head, head restricted to an atom
        Blind,       // cla x, y: f
        ChooseAll,   // ada x: f   (environment picks x)
        ChooseEx,    // ade x: f   (machine must witness x)
        Context,     // f @ [/p1, /p2]   claim of derivability from those agents
        Macro,       // bare /p inside a formula: reference to p's knowledge
    };

    static Formula atom(Atom a);
    static Formula conj(std::vector<Formula> parts);
    static Formula impl(Formula body, Atom head);
    static Formula blind(std::vector<std::string> vars, Formula body);
    static Formula choose_all(std::string var, Formula body);
    static Formula choose_ex(std::string var, Formula body);
    // Flattens a directly nested Context: inner context paths come first,
    // duplicates are dropped, order is otherwise preserved.
    static Formula with_context(Formula inner, std::vector<AgentPath> ctx);
    static Formula macro(AgentPath path);

    Kind kind() const;
    const Atom& atom_value() const;                  // Atom
    const std::vector<Formula>& parts() const;       // Conj
    const Formula& body() const;                     // Impl, Blind, ChooseAll, ChooseEx, Context
    const Atom& head() const;                        // Impl
    const std::vector<std::string>& vars() const;    // Blind
    const std::string& var() const;                  // ChooseAll, ChooseEx
    const std::vector<AgentPath>& context() const;   // Context
    const AgentPath& macro_path() const;             // Macro

    friend bool operator==(const Formula& a, const Formula& b);
    friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

private:
    explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const FormulaNode> node_;
};

struct FormulaNode {
    Formula::Kind kind;
    Atom atom;                        // Atom, Impl head
    std::vector<Formula> parts;       // Conj
    std::optional<Formula> body;      // Impl, Blind, ChooseAll, ChooseEx, Context
    std::vector<std::string> vars;    // Blind; [0] for ChooseAll/ChooseEx
    std::vector<AgentPath> ctx;       // Context
    AgentPath mpath;                  // Macro
};

struct Declaration {
    AgentPath path;
    Formula knowledge;

    friend bool operator==(const Declaration& a, const Declaration& b) {
        return a.path == b.path && a.knowledge == b.knowledge;
    }
};

// wedge x from N: agent /p[pattern(x)] = knowledge(x).
// An infinite family of declarations, one per x >= lower, instantiated lazily.
struct ClassDecl {
    std::string var;
    std::uint64_t lower = 0;
    Declaration tmpl;

    friend bool operator==(const ClassDecl& a, const ClassDecl& b) {
        return a.var == b.var && a.lower == b.lower && a.tmpl == b.tmpl;
    }
};

using Decl = std::variant<Declaration, ClassDecl>;

struct Program {
    std::vector<Decl> decls;

    friend bool operator==(const Program& a, const Program& b) { return a.decls == b.decls; }
};

}  // namespace colweb
