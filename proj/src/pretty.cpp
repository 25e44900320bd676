#include "colweb/pretty.hpp"

#include <sstream>

namespace colweb {

namespace {

bool is_factor(const Term& t) {
    return t.kind() == Term::Kind::Nat || t.kind() == Term::Kind::Var;
}

void term_to(std::ostream& os, const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Nat: os << t.nat_value(); return;
        case Term::Kind::Var: os << t.var_name(); return;
        case Term::Kind::Succ:
            term_to(os, t.succ_arg());
            os << "'";
            return;
        case Term::Kind::Plus:
            term_to(os, t.plus_lhs());
            os << "+";
            if (is_factor(t.plus_rhs())) {
                term_to(os, t.plus_rhs());
            } else {
                os << "(";
                term_to(os, t.plus_rhs());
                os << ")";
            }
            return;
    }
}

bool is_quantifier(const Formula& f) {
    switch (f.kind()) {
        case Formula::Kind::Blind:
        case Formula::Kind::ChooseAll:
        case Formula::Kind::ChooseEx: return true;
        default: return false;
    }
}

void formula_to(std::ostream& os, const Formula& f);

// A conjunct must read back as an atomf: atoms and macro paths stand bare,
// everything else is parenthesized.
void conjunct_to(std::ostream& os, const Formula& f) {
    if (f.kind() == Formula::Kind::Atom || f.kind() == Formula::Kind::Macro) {
        formula_to(os, f);
    } else {
        os << "(";
        formula_to(os, f);
        os << ")";
    }
}

void formula_to(std::ostream& os, const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
        case K::Atom: os << pretty(f.atom_value()); return;
        case K::Conj: {
            bool first = true;
            for (const auto& p : f.parts()) {
                if (!first) os << " & ";
                first = false;
                conjunct_to(os, p);
            }
            return;
        }
        case K::Impl: {
            if (f.body().kind() == K::Conj || f.body().kind() == K::Atom ||
                f.body().kind() == K::Macro) {
                formula_to(os, f.body());
            } else {
                conjunct_to(os, f.body());
            }
            os << " -> " << pretty(f.head());
            return;
        }
        case K::Blind: {
            os << "cla ";
            bool first = true;
            for (const auto& v : f.vars()) {
                if (!first) os << ", ";
                first = false;
                os << v;
            }
            os << ": ";
            formula_to(os, f.body());
            return;
        }
        case K::ChooseAll:
        case K::ChooseEx: {
            os << (f.kind() == K::ChooseAll ? "ada " : "ade ") << f.var() << ": ";
            formula_to(os, f.body());
            return;
        }
        case K::Context: {
            if (is_quantifier(f.body())) {
                os << "(";
                formula_to(os, f.body());
                os << ")";
            } else {
                formula_to(os, f.body());
            }
            os << " @ [";
            bool first = true;
            for (const auto& p : f.context()) {
                if (!first) os << ", ";
                first = false;
                os << pretty(p);
            }
            os << "]";
            return;
        }
        case K::Macro: os << pretty(f.macro_path()); return;
    }
}

}  // namespace

std::string pretty(const Term& t) {
    std::ostringstream os;
    term_to(os, t);
    return os.str();
}

std::string pretty(const Atom& a) {
    std::ostringstream os;
    os << a.pred;
    if (!a.args.empty()) {
        os << "(";
        bool first = true;
        for (const auto& t : a.args) {
            if (!first) os << ",";
            first = false;
            term_to(os, t);
        }
        os << ")";
    }
    return os.str();
}

std::string pretty(const AgentPath& p) {
    std::ostringstream os;
    os << "/" << p.name;
    if (p.index) {
        os << "[";
        term_to(os, *p.index);
        os << "]";
    }
    return os.str();
}

std::string pretty(const Formula& f) {
    std::ostringstream os;
    formula_to(os, f);
    return os.str();
}

std::string pretty(const Declaration& d) {
    return "agent " + pretty(d.path) + " = " + pretty(d.knowledge) + ".";
}

std::string pretty(const ClassDecl& c) {
    std::string out = "wedge " + c.var;
    if (c.lower > 0) out += " from " + std::to_string(c.lower);
    return out + ": " + pretty(c.tmpl);
}

std::string pretty(const Program& p) {
    std::string out;
    for (const auto& d : p.decls) {
        if (std::holds_alternative<Declaration>(d))
            out += pretty(std::get<Declaration>(d));
        else
            out += pretty(std::get<ClassDecl>(d));
        out += "\n";
    }
    return out;
}

}  // namespace colweb
