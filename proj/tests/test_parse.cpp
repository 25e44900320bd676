#include <doctest.h>

#include <string>

#include "colweb/errors.hpp"
#include "colweb/parse.hpp"
#include "colweb/pretty.hpp"
#include "colweb/terms.hpp"
#include "helpers.hpp"

using namespace colweb;
using testutil::program_text;

TEST_CASE("corpus round-trips through pretty") {
    for (const char* name :
         {"fib_buq.colw", "fib_puq.colw", "fib_agents.colw", "fib_variation.colw", "m_chain.colw",
          "fib_agents_corrupt.colw", "empty.colw"}) {
        CAPTURE(name);
        auto p1 = parse_program(program_text(name));
        auto text = pretty(p1);
        auto p2 = parse_program(text);
        CHECK(p1 == p2);
        CHECK(pretty(p2) == text);
    }
}

TEST_CASE("terms: postfix successor binds after plus") {
    CHECK(eval_term(parse_term("0'''")) == 3);
    CHECK(eval_term(parse_term("2+3'")) == 6);
    CHECK(eval_term(parse_term("2+(3')")) == 6);
    CHECK(eval_term(parse_term("(1+1)''")) == 4);
    CHECK_THROWS_AS(eval_term(parse_term("x")), UnboundVariable);
}

TEST_CASE("term pretty is a fixpoint on canonical forms") {
    for (const char* s : {"0", "42", "x", "x'", "x''", "x+1", "x+1'", "x+(y')", "x+y+z"}) {
        CAPTURE(s);
        CHECK(pretty(parse_term(s)) == s);
    }
}

TEST_CASE("choice quantifiers desugar to nested binders") {
    auto f = parse_query("ade x, y: p(x,y)");
    REQUIRE(f.kind() == Formula::Kind::ChooseEx);
    CHECK(f.var() == "x");
    REQUIRE(f.body().kind() == Formula::Kind::ChooseEx);
    CHECK(f.body().var() == "y");
    CHECK(f.body().body().kind() == Formula::Kind::Atom);

    auto g = parse_query("ada n: fib(n,n)");
    CHECK(g.kind() == Formula::Kind::ChooseAll);
    CHECK(g.var() == "n");
}

TEST_CASE("blind quantifier keeps its variable list") {
    auto f = parse_query("cla x, y: p(x,y) -> q(x)");
    REQUIRE(f.kind() == Formula::Kind::Blind);
    CHECK(f.vars() == std::vector<std::string>{"x", "y"});
    CHECK(f.body().kind() == Formula::Kind::Impl);
}

TEST_CASE("context annotations flatten and dedup") {
    auto f = parse_query("(p @ [/a]) @ [/b, /a]");
    REQUIRE(f.kind() == Formula::Kind::Context);
    REQUIRE(f.context().size() == 2);
    CHECK(pretty(f) == "p @ [/a, /b]");
}

TEST_CASE("conjunction grouping is preserved") {
    CHECK(pretty(parse_query("p & q & r")) == "p & q & r");
    CHECK(pretty(parse_query("p & (q & r)")) == "p & (q & r)");
    CHECK(parse_query("p & q & r").parts().size() == 3);
}

TEST_CASE("parse errors carry position and expectations") {
    try {
        parse_program("agent /a = p");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.column >= 12);
        CHECK(!e.expected.empty());
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}

TEST_CASE("predicate arity is fixed within a parse") {
    try {
        parse_program("agent /a = p(1) & p(1,2).");
        FAIL("expected ArityError");
    } catch (const ArityError& e) {
        CHECK(e.predicate == "p");
    }
    // Separate parses are separate scopes.
    CHECK_NOTHROW(parse_program("agent /a = p(1)."));
    CHECK_NOTHROW(parse_program("agent /a = p(1,2)."));
}

TEST_CASE("keywords are reserved") {
    CHECK_THROWS_AS(parse_program("agent /agent = p."), ParseError);
    CHECK_THROWS_AS(parse_program("agent /a = cla agent: p -> q."), ParseError);
}

TEST_CASE("implication heads must be atoms") {
    CHECK_THROWS_AS(parse_program("agent /a = p -> (q & r)."), ParseError);
    CHECK_THROWS_AS(parse_program("agent /a = p -> /m."), ParseError);
    try {
        parse_program("agent /a = p -> (q & r).");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("implication head") != std::string::npos);
    }
}

TEST_CASE("comments may hold any bytes, code may not") {
    CHECK_NOTHROW(parse_program("# unicode comment: \xc3\xb8\nagent /a = p."));
    CHECK_THROWS_AS(parse_program("agent /a = p\xc3\xb8."), ParseError);
    CHECK_THROWS_AS(parse_program("agent /a = p %."), ParseError);
}

TEST_CASE("numbers that overflow are rejected") {
    CHECK_THROWS_AS(parse_program("agent /a = p(99999999999999999999999)."), ParseError);
}

TEST_CASE("queries accept an optional trailing dot") {
    CHECK(parse_query("p & q.") == parse_query("p & q"));
    CHECK_THROWS_AS(parse_query("p q"), ParseError);
    CHECK_THROWS_AS(parse_query(""), ParseError);
}

TEST_CASE("paths parse alone") {
    auto p = parse_path("/a[3]");
    CHECK(p.name == "a");
    REQUIRE(p.index.has_value());
    CHECK(eval_term(*p.index) == 3);
    CHECK(!parse_path("/a").index.has_value());
    CHECK_THROWS_AS(parse_path("a"), ParseError);
    CHECK_THROWS_AS(parse_path("/a[3] junk"), ParseError);
}

TEST_CASE("class declarations pretty-print with their lower bound") {
    auto text = "wedge x from 3: agent /a[x] = p(x).\n";
    CHECK(pretty(parse_program(text)) == text);
    CHECK(pretty(parse_program("wedge x from 0: agent /a[x] = p(x).")) ==
          "wedge x: agent /a[x] = p(x).\n");
}
