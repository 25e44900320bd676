#include <doctest.h>

#include <cstdint>
#include <string>
#include <vector>

#include "colweb/errors.hpp"
#include "colweb/parse.hpp"
#include "colweb/pretty.hpp"
#include "colweb/registry.hpp"
#include "colweb/solver.hpp"
#include "helpers.hpp"

using namespace colweb;
using testutil::atom;
using testutil::fib0;
using testutil::fib1;
using testutil::load_program;
using testutil::witness;

TEST_CASE("solve_buq agrees with the iterative oracle and never grows the store") {
    auto r = load_program("fib_buq.colw");
    auto facts_before = r.global_facts.size();
    for (std::uint64_t n = 0; n <= 15; ++n) {
        CAPTURE(n);
        Atom goal{"fib", {Term::nat(n), Term::var("y")}};
        auto res = solve_buq(goal, r.global_facts, r.global_rules, 512);
        REQUIRE(res.answer.success);
        CHECK(witness(res.answer, "y") == fib0(n));
    }
    CHECK(r.global_facts.size() == facts_before);
}

TEST_CASE("solve_buq proves ground goals through arithmetic heads") {
    auto r = load_program("fib_buq.colw");
    CHECK(solve_buq(atom("fib(2,2)"), r.global_facts, r.global_rules, 512).answer.success);
    CHECK(solve_buq(atom("fib(6,13)"), r.global_facts, r.global_rules, 512).answer.success);
    CHECK_FALSE(solve_buq(atom("fib(2,3)"), r.global_facts, r.global_rules, 512).answer.success);
    CHECK_FALSE(solve_buq(atom("gib(2,2)"), r.global_facts, r.global_rules, 512).answer.success);
}

TEST_CASE("solve_buq throws past the depth limit") {
    auto r = load_program("fib_buq.colw");
    Atom goal{"fib", {Term::nat(12), Term::var("y")}};
    CHECK_THROWS_AS(solve_buq(goal, r.global_facts, r.global_rules, 5), DepthExceeded);
}

TEST_CASE("chain_forward derives fib facts strictly by rounds") {
    auto r = load_program("fib_puq.colw");
    auto res = chain_forward(r.global_facts, r.global_rules, atom("fib(3,x)"), 10000);
    REQUIRE(res.answer.success);
    CHECK(witness(res.answer, "x") == 3);
    REQUIRE(res.derived.size() == 2);
    CHECK(pretty(res.derived[0]) == "fib(2,2)");
    CHECK(pretty(res.derived[1]) == "fib(3,3)");
    CHECK(res.trace.firing_count() == 2);
    CHECK(res.trace.to_text().find("fib(1,1) & fib(2,2) -> fib(3,3)") != std::string::npos);
    CHECK(res.trace.well_founded());
}

TEST_CASE("chain_forward quiesces") {
    auto r = load(parse_program("agent /f = p(1).\n"
                                "wedge n: agent /r[n] = cla x: p(x) -> q(x)."));
    // One instance's rule, run directly: derives q(1), then nothing new.
    auto res = chain_forward(r.global_facts, r.global_rules, std::nullopt, 10000);
    CHECK(res.answer.success);
    REQUIRE(res.derived.size() == 1);
    CHECK(pretty(res.derived[0]) == "q(1)");

    // A goal that quiescence never reaches is a plain failure.
    auto res2 = chain_forward(r.global_facts, r.global_rules, atom("q(7)"), 10000);
    CHECK_FALSE(res2.answer.success);
}

TEST_CASE("chain_forward throws when the rounds run out") {
    auto r = load_program("fib_puq.colw");
    CHECK_THROWS_AS(chain_forward(r.global_facts, r.global_rules, atom("fib(50,x)"), 10),
                    RoundsExceeded);
    CHECK_THROWS_AS(chain_forward(r.global_facts, r.global_rules, std::nullopt, 10),
                    RoundsExceeded);
}

TEST_CASE("every chained lemma is independently provable backward") {
    auto puq = load_program("fib_puq.colw");
    auto buq = load_program("fib_buq.colw");
    auto res = chain_forward(puq.global_facts, puq.global_rules, atom("fib(12,x)"), 10000);
    REQUIRE(res.answer.success);
    for (const auto& lemma : res.derived) {
        CAPTURE(pretty(lemma));
        CHECK(solve_buq(lemma, buq.global_facts, buq.global_rules, 512).answer.success);
    }
}

TEST_CASE("engine answers the fib_agents front-door query") {
    auto r = load_program("fib_agents.colw");
    Engine engine(r);
    auto ans = engine.resolve_query(r.agents.at(AgentKey{"query", std::nullopt}).knowledge);
    REQUIRE(ans.success);
    CHECK(ans.witnesses == std::vector<std::pair<std::string, std::uint64_t>>{{"y", 3}});
    CHECK(engine.trace().well_founded());

    auto s = snapshot(r);
    CHECK(s.find("agent /a[3] = fib(3,2).\n") != std::string::npos);
    CHECK(s.find("agent /a[4] = fib(4,3).\n") != std::string::npos);
    CHECK(s.find("wedge x from 3: agent /a[x+2]") != std::string::npos);

    // Already materialized: a second engine answers without any new firing.
    Engine again(r);
    auto ans2 = again.resolve_query(parse_query("(ade y: fib(4,y)) @ [/fib]"));
    CHECK(ans2.success);
    CHECK(again.firings() == 0);
}

TEST_CASE("engine memoizes exactly the asked-for prefix") {
    auto r = load_program("fib_agents.colw");
    Engine engine(r);
    auto ans = engine.resolve_query(parse_query("(ade y: fib(30,y)) @ [/fib]"));
    REQUIRE(ans.success);
    CHECK(witness(ans, "y") == fib1(30));
    CHECK(engine.firings() == 28);

    Engine again(r);
    auto ans2 = again.resolve_query(parse_query("(ade y: fib(30,y)) @ [/fib]"));
    REQUIRE(ans2.success);
    CHECK(witness(ans2, "y") == fib1(30));
    CHECK(again.firings() == 0);
}

TEST_CASE("context-free queries run on a transient copy of the global store") {
    auto r = load_program("fib_buq.colw");
    auto before = snapshot(r);
    Engine engine(r);
    auto ans = engine.resolve_query(parse_query("ade x: fib(3,x)"));
    REQUIRE(ans.success);
    CHECK(witness(ans, "x") == 3);
    CHECK(engine.firings() == 0);
    CHECK(snapshot(r) == before);

    auto p = load_program("fib_puq.colw");
    auto pbefore = snapshot(p);
    Engine pe(p);
    auto pans = pe.resolve_query(parse_query("ade x: fib(6,x)"));
    REQUIRE(pans.success);
    CHECK(witness(pans, "x") == fib0(6));
    CHECK(pe.firings() > 0);
    CHECK(snapshot(p) == pbefore);  // chain lemmas are not persisted globally
}

TEST_CASE("ada variables take caller arguments outermost first") {
    auto r = load_program("fib_agents.colw");
    Engine engine(r);
    auto q = parse_query("ada n: (ade y: fib(n,y)) @ [/fib]");
    auto ans = engine.resolve_query(q, {5});
    REQUIRE(ans.success);
    CHECK(witness(ans, "y") == 5);
    Engine bare(r);
    CHECK_THROWS_AS(bare.resolve_query(q), MissingArgument);
}

TEST_CASE("queries with free variables are rejected") {
    auto r = load_program("fib_buq.colw");
    Engine engine(r);
    CHECK_THROWS_AS(engine.resolve_query(parse_query("fib(3,x)")), SolveFailure);
}

TEST_CASE("annotations pointing nowhere raise AbsentAgent") {
    auto r = load_program("fib_agents.colw");
    Engine engine(r);
    CHECK_THROWS_AS(engine.resolve_query(parse_query("fib(1,1) @ [/nope]")), AbsentAgent);
    CHECK_THROWS_AS(engine.resolve_query(parse_query("fib(1,1) @ [/b[1]]")), AbsentAgent);
}

TEST_CASE("macro cycles are detected") {
    auto r = load(parse_program("agent /p = /q. agent /q = /p."));
    Engine engine(r);
    CHECK_THROWS_AS(engine.expand_macro(parse_path("/p")), CycleError);
    CHECK_THROWS_AS(engine.resolve_query(parse_query("/p")), CycleError);
}

TEST_CASE("expand_macro unfolds the m_chain family without touching the registry") {
    auto r = load_program("m_chain.colw");
    auto before = snapshot(r);
    Engine engine(r);
    auto f = engine.expand_macro(parse_path("/m[0''']"));
    CHECK(pretty(f) == "p & (p & (p & q))");
    CHECK(snapshot(r) == before);
    CHECK(r.agents.size() == 1);

    auto base = engine.expand_macro(parse_path("/m[0]"));
    CHECK(pretty(base) == "q");
    CHECK_THROWS_AS(engine.expand_macro(parse_path("/nope")), AbsentAgent);
}

TEST_CASE("failed materialization keeps the index consumed but stores nothing") {
    auto r = load(parse_program("agent /f = fib(1,1).\n"
                                "wedge x: agent /bad[x'] = (ade y: gib(x',y)) @ [/f]."));
    Engine engine(r);
    CHECK_THROWS_AS(engine.materialize(parse_path("/bad[1]")), SolveFailure);
    CHECK(residual_lower(r, "bad") == 1);
    CHECK(lookup(r, parse_path("/bad[1]")).entry == nullptr);
}

TEST_CASE("variation program answers like fib_agents but backward") {
    auto r = load_program("fib_variation.colw");
    Engine engine(r);
    for (std::uint64_t n = 3; n <= 10; ++n) {
        CAPTURE(n);
        auto ans = engine.resolve_query(parse_query("ada n: (ade y: fib(n,y)) @ [/fib]"), {n});
        REQUIRE(ans.success);
        CHECK(witness(ans, "y") == fib1(n));
    }
    CHECK(engine.firings() == 0);  // the shared /b rule back-chains
    CHECK(snapshot(r).find("agent /a[10] = fib(10,55).\n") != std::string::npos);
}

TEST_CASE("engine depth limit surfaces as DepthExceeded") {
    auto r = load_program("fib_buq.colw");
    Engine engine(r, Limits{5, 10000});
    CHECK_THROWS_AS(engine.resolve_query(parse_query("ade x: fib(12,x)")), DepthExceeded);
}
