#include "colweb/parse.hpp"

#include <charconv>
#include <map>
#include <string>
#include <vector>

#include "colweb/errors.hpp"

namespace colweb {

namespace {

enum class Tok {
    Ident,
    Nat,
    KwAgent,
    KwWedge,
    KwFrom,
    KwCla,
    KwAda,
    KwAde,
    Slash,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Eq,
    Amp,
    At,
    Arrow,
    PlusSign,
    Prime,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    std::uint64_t value = 0;
    int line = 1;
    int col = 1;
};

bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1, col = 1;
    auto bump = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            bump(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') bump(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            t.text.assign(src.substr(i, j - i));
            if (t.text == "agent")
                t.kind = Tok::KwAgent;
            else if (t.text == "wedge")
                t.kind = Tok::KwWedge;
            else if (t.text == "from")
                t.kind = Tok::KwFrom;
            else if (t.text == "cla")
                t.kind = Tok::KwCla;
            else if (t.text == "ada")
                t.kind = Tok::KwAda;
            else if (t.text == "ade")
                t.kind = Tok::KwAde;
            else
                t.kind = Tok::Ident;
            bump(j - i);
        } else if (c >= '0' && c <= '9') {
            std::size_t j = i;
            while (j < src.size() && src[j] >= '0' && src[j] <= '9') ++j;
            t.kind = Tok::Nat;
            t.text.assign(src.substr(i, j - i));
            auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
            if (res.ec != std::errc())
                throw ParseError("number out of range at line " + std::to_string(line) +
                                     ", column " + std::to_string(col),
                                 line, col, {"number"});
            bump(j - i);
        } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
            t.kind = Tok::Arrow;
            t.text = "->";
            bump(2);
        } else {
            switch (c) {
                case '/': t.kind = Tok::Slash; break;
                case '[': t.kind = Tok::LBrack; break;
                case ']': t.kind = Tok::RBrack; break;
                case '(': t.kind = Tok::LParen; break;
                case ')': t.kind = Tok::RParen; break;
                case ',': t.kind = Tok::Comma; break;
                case ':': t.kind = Tok::Colon; break;
                case '.': t.kind = Tok::Dot; break;
                case '=': t.kind = Tok::Eq; break;
                case '&': t.kind = Tok::Amp; break;
                case '@': t.kind = Tok::At; break;
                case '+': t.kind = Tok::PlusSign; break;
                case '\'': t.kind = Tok::Prime; break;
                default:
                    throw ParseError("unexpected character '" + std::string(1, c) +
                                         "' at line " + std::to_string(line) + ", column " +
                                         std::to_string(col),
                                     line, col, {});
            }
            t.text = std::string(1, c);
            bump(1);
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.text = "end of input";
    end.line = line;
    end.col = col;
    out.push_back(std::move(end));
    return out;
}

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::Ident: return "identifier '" + t.text + "'";
        case Tok::Nat: return "number " + t.text;
        case Tok::End: return "end of input";
        default: return "'" + t.text + "'";
    }
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(lex(text)) {}

    Program program() {
        Program p;
        while (!at(Tok::End)) p.decls.push_back(decl());
        return p;
    }

    Formula query() {
        Formula f = formula();
        accept(Tok::Dot);
        expect(Tok::End, "end of input");
        return f;
    }

    AgentPath path_only() {
        AgentPath p = path();
        expect(Tok::End, "end of input");
        return p;
    }

    Term term_only() {
        Term t = term();
        expect(Tok::End, "end of input");
        return t;
    }

private:
    std::vector<Token> toks_;
    std::size_t i_ = 0;
    std::map<std::string, std::size_t> arity_;

    const Token& peek() const { return toks_[i_]; }
    bool at(Tok k) const { return peek().kind == k; }
    bool accept(Tok k) {
        if (!at(k)) return false;
        ++i_;
        return true;
    }
    Token expect(Tok k, const std::string& what) {
        if (!at(k)) throw err({what});
        return toks_[i_++];
    }
    ParseError err(std::vector<std::string> expected) const {
        const Token& t = peek();
        std::string msg = "parse error at line " + std::to_string(t.line) + ", column " +
                          std::to_string(t.col) + ": unexpected " + describe(t);
        if (!expected.empty()) {
            msg += ", expected ";
            for (std::size_t k = 0; k < expected.size(); ++k) {
                if (k) msg += expected.size() == 2 ? " or " : ", ";
                msg += expected[k];
            }
        }
        return ParseError(msg, t.line, t.col, std::move(expected));
    }

    Decl decl() {
        if (at(Tok::KwWedge)) return class_decl();
        if (at(Tok::KwAgent)) return agent_decl();
        throw err({"'agent'", "'wedge'"});
    }

    ClassDecl class_decl() {
        expect(Tok::KwWedge, "'wedge'");
        std::string var = expect(Tok::Ident, "identifier").text;
        std::uint64_t lower = 0;
        if (accept(Tok::KwFrom)) lower = expect(Tok::Nat, "number").value;
        expect(Tok::Colon, "':'");
        return ClassDecl{std::move(var), lower, agent_decl()};
    }

    Declaration agent_decl() {
        expect(Tok::KwAgent, "'agent'");
        AgentPath p = path();
        expect(Tok::Eq, "'='");
        Formula f = formula();
        expect(Tok::Dot, "'.'");
        return Declaration{std::move(p), std::move(f)};
    }

    AgentPath path() {
        expect(Tok::Slash, "'/'");
        AgentPath p;
        p.name = expect(Tok::Ident, "identifier").text;
        if (accept(Tok::LBrack)) {
            p.index = term();
            expect(Tok::RBrack, "']'");
        }
        return p;
    }

    Formula formula() {
        if (at(Tok::KwCla) || at(Tok::KwAda) || at(Tok::KwAde)) return quant();
        return annotated();
    }

    Formula quant() {
        Tok q = peek().kind;
        ++i_;
        std::vector<std::string> vars;
        vars.push_back(expect(Tok::Ident, "identifier").text);
        while (accept(Tok::Comma)) vars.push_back(expect(Tok::Ident, "identifier").text);
        expect(Tok::Colon, "':'");
        Formula body = formula();
        if (q == Tok::KwCla) return Formula::blind(std::move(vars), std::move(body));
        // Multi-variable choice quantifiers nest one binder per variable.
        for (auto it = vars.rbegin(); it != vars.rend(); ++it)
            body = q == Tok::KwAda ? Formula::choose_all(*it, std::move(body))
                                   : Formula::choose_ex(*it, std::move(body));
        return body;
    }

    Formula annotated() {
        Formula f = impl();
        if (accept(Tok::At)) {
            expect(Tok::LBrack, "'['");
            std::vector<AgentPath> ctx;
            ctx.push_back(path());
            while (accept(Tok::Comma)) ctx.push_back(path());
            expect(Tok::RBrack, "']'");
            f = Formula::with_context(std::move(f), std::move(ctx));
        }
        return f;
    }

    Formula impl() {
        Formula body = conj();
        if (accept(Tok::Arrow)) {
            const Token& head_tok = peek();
            Formula head = atomf();
            if (head.kind() != Formula::Kind::Atom)
                throw ParseError("implication head must be an atom at line " +
                                     std::to_string(head_tok.line) + ", column " +
                                     std::to_string(head_tok.col),
                                 head_tok.line, head_tok.col, {"atom"});
            return Formula::impl(std::move(body), head.atom_value());
        }
        return body;
    }

    Formula conj() {
        std::vector<Formula> parts;
        parts.push_back(atomf());
        while (accept(Tok::Amp)) parts.push_back(atomf());
        if (parts.size() == 1) return std::move(parts[0]);
        return Formula::conj(std::move(parts));
    }

    Formula atomf() {
        if (at(Tok::Slash)) return Formula::macro(path());
        if (accept(Tok::LParen)) {
            Formula f = formula();
            expect(Tok::RParen, "')'");
            return f;
        }
        if (at(Tok::Ident)) return Formula::atom(atom());
        throw err({"atom", "'/'", "'('"});
    }

    Atom atom() {
        Token name = expect(Tok::Ident, "identifier");
        Atom a;
        a.pred = name.text;
        if (accept(Tok::LParen)) {
            a.args.push_back(term());
            while (accept(Tok::Comma)) a.args.push_back(term());
            expect(Tok::RParen, "')'");
        }
        auto [it, fresh] = arity_.emplace(a.pred, a.args.size());
        if (!fresh && it->second != a.args.size())
            throw ArityError("predicate '" + a.pred + "' used with arity " +
                                 std::to_string(a.args.size()) + " after arity " +
                                 std::to_string(it->second),
                             a.pred);
        return a;
    }

    Term term() {
        Term t = factor();
        for (;;) {
            if (accept(Tok::PlusSign)) {
                t = Term::plus(std::move(t), factor());
            } else if (accept(Tok::Prime)) {
                t = Term::succ(std::move(t));
            } else {
                return t;
            }
        }
    }

    Term factor() {
        if (at(Tok::Nat)) return Term::nat(toks_[i_++].value);
        if (at(Tok::Ident)) return Term::var(toks_[i_++].text);
        if (accept(Tok::LParen)) {
            Term t = term();
            expect(Tok::RParen, "')'");
            return t;
        }
        throw err({"number", "identifier", "'('"});
    }
};

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).program(); }
Formula parse_query(std::string_view text) { return Parser(text).query(); }
AgentPath parse_path(std::string_view text) { return Parser(text).path_only(); }
Term parse_term(std::string_view text) { return Parser(text).term_only(); }

}  // namespace colweb
