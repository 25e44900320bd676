#include <doctest.h>

#include <string>

#include "colweb/errors.hpp"
#include "colweb/parse.hpp"
#include "colweb/pretty.hpp"
#include "colweb/registry.hpp"
#include "helpers.hpp"

using namespace colweb;
using testutil::load_program;

TEST_CASE("loading fib_agents: entries, classes, shadowing") {
    auto r = load_program("fib_agents.colw");
    CHECK(r.agents.size() == 4);
    CHECK(r.declared_order.size() == 4);
    REQUIRE(r.classes.size() == 2);
    CHECK(r.classes[0].id == "b");
    CHECK(r.classes[1].id == "a");

    // /a[2] shadows the instance the /a class would put at index 2 (x=0).
    CHECK(r.classes[1].consumed == std::set<std::uint64_t>{0});
    CHECK(r.classes[0].consumed.empty());
    CHECK(residual_lower(r, "a") == 1);
    CHECK(residual_lower(r, "b") == 0);
    CHECK_THROWS_AS(residual_lower(r, "nope"), Error);
    CHECK_THROWS_AS(residual_lower(r, std::size_t{7}), Error);
}

TEST_CASE("lookup prefers entries, then class patterns in order") {
    auto r = load_program("fib_agents.colw");

    auto hit = lookup(r, parse_path("/a[2]"));
    REQUIRE(hit.entry != nullptr);
    CHECK(pretty(hit.entry->knowledge) == "fib(2,1)");

    auto cls = lookup(r, parse_path("/a[3]"));
    CHECK(cls.entry == nullptr);
    REQUIRE(cls.cls.has_value());
    CHECK(cls.cls->class_pos == 1);
    CHECK(cls.cls->var_value == 1);

    auto b5 = lookup(r, parse_path("/b[5]"));
    REQUIRE(b5.cls.has_value());
    CHECK(b5.cls->class_pos == 0);
    CHECK(b5.cls->var_value == 3);

    CHECK(lookup(r, parse_path("/b[1]")).absent());
    CHECK(lookup(r, parse_path("/zzz")).absent());
    CHECK(lookup(r, parse_path("/fib")).entry != nullptr);
}

TEST_CASE("load rejects malformed declarations") {
    CHECK_THROWS_AS(load(parse_program("agent /a = p. agent /a = q.")), DuplicateAgent);
    // Index keys compare by value, not by shape.
    CHECK_THROWS_AS(load(parse_program("agent /a[2] = p. agent /a[1+1] = q.")), DuplicateAgent);
    CHECK_THROWS_AS(load(parse_program("agent /a = p(x).")), LoadError);
    CHECK_THROWS_AS(load(parse_program("agent /a[x] = p.")), LoadError);
    // Class templates need an index pattern over exactly the class variable.
    CHECK_THROWS_AS(load(parse_program("wedge x: agent /a = p.")), LoadError);
    CHECK_THROWS_AS(load(parse_program("wedge x: agent /a[3] = p.")), LoadError);
    CHECK_THROWS_AS(load(parse_program("wedge x: agent /a[y+1] = p.")), LoadError);
    CHECK_THROWS_AS(load(parse_program("wedge x: agent /a[x+x] = p.")), LoadError);
    CHECK_THROWS_AS(load(parse_program("wedge x: agent /a[x] = p(x,y).")), LoadError);
    CHECK_NOTHROW(load(parse_program("wedge x from 2: agent /a[x+1] = p(x).")));
}

TEST_CASE("the global store flattens plain agents and rule-shaped classes") {
    auto buq = load_program("fib_buq.colw");
    REQUIRE(buq.global_facts.size() == 2);
    CHECK(pretty(buq.global_facts[0].atom) == "fib(0,1)");
    CHECK(buq.global_facts[0].origin == "/fib0");
    REQUIRE(buq.global_rules.size() == 1);
    CHECK(buq.global_rules[0].kind == Clause::Kind::BUQ);
    CHECK(buq.global_rules[0].vars == std::vector<std::string>{"x", "y", "z"});
    CHECK(buq.global_rules[0].body.size() == 2);

    auto puq = load_program("fib_puq.colw");
    REQUIRE(puq.global_rules.size() == 1);
    CHECK(puq.global_rules[0].kind == Clause::Kind::PUQ);
    CHECK(puq.global_rules[0].vars == std::vector<std::string>{"x", "y", "z"});

    // m_chain: the base macro agent is a plain fact; the class template is
    // not rule-shaped, so it contributes nothing globally.
    auto m = load_program("m_chain.colw");
    REQUIRE(m.global_facts.size() == 1);
    CHECK(pretty(m.global_facts[0].atom) == "q");
    CHECK(m.global_rules.empty());
}

TEST_CASE("snapshot of a freshly loaded fib_agents") {
    auto r = load_program("fib_agents.colw");
    CHECK(snapshot(r) ==
          "agent /a[1] = fib(1,1).\n"
          "agent /a[2] = fib(2,1).\n"
          "agent /fib = ada n: (ade y: fib(n,y)) @ [/a[n]].\n"
          "agent /query = (ade y: fib(4,y)) @ [/fib].\n"
          "wedge x from 0: agent /b[x+2] = cla y, z: fib(x,y) & fib(x+1,z) -> fib(x+2,y+z).\n"
          "wedge x from 1: agent /a[x+2] = (ade y: fib(x+2,y)) @ [/a[x], /a[x+1], /b[x+2]].\n");
}

TEST_CASE("snapshot re-parses to the same snapshot") {
    for (const char* name : {"fib_buq.colw", "fib_puq.colw", "fib_agents.colw",
                             "fib_variation.colw", "m_chain.colw", "empty.colw"}) {
        CAPTURE(name);
        auto r = load_program(name);
        auto s = snapshot(r);
        auto r2 = load(parse_program(s));
        CHECK(snapshot(r2) == s);
    }
}

TEST_CASE("duplicate keys across explicit and normalized paths") {
    // Normalization folds the ground index before keying.
    auto r = load(parse_program("agent /a[1+1] = p."));
    CHECK(r.agents.count(AgentKey{"a", 2}) == 1);
    CHECK(pretty(r.agents.at(AgentKey{"a", 2}).path) == "/a[2]");
}
