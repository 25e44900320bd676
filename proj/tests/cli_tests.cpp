#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <string>

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
};

CmdResult run_cmd(const std::string& cmd) {
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string bin() {
    const char* b = std::getenv("COLWEB_BIN");
    REQUIRE(b != nullptr);
    return b;
}

std::string prog(const std::string& name) {
    const char* d = std::getenv("COLWEB_PROGRAMS");
    REQUIRE(d != nullptr);
    return std::string(d) + "/" + name;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("run: the default query answers and dumps the knowledgebase") {
    auto r = run_cmd(bin() + " run " + prog("fib_agents.colw") + " --dump 2>/dev/null");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "yes, y=3\n"));
    CHECK(contains(r.out, "agent /a[4] = fib(4,3).\n"));
    CHECK(contains(r.out, "wedge x from 3: agent /a[x+2]"));
    CHECK(contains(r.out, "# consumed: 1, 2\n"));
}

TEST_CASE("run: explicit queries, success and failure") {
    auto ok = run_cmd(bin() + " run " + prog("fib_buq.colw") + " --query \"ade x: fib(3,x)\"");
    CHECK(ok.code == 0);
    CHECK(ok.out == "yes, x=3\n");

    auto no = run_cmd(bin() + " run " + prog("fib_buq.colw") + " --query \"ade x: gib(3,x)\"");
    CHECK(no.code == 1);
    CHECK(no.out == "no\n");

    auto args = run_cmd(bin() + " run " + prog("fib_agents.colw") +
                        " --query \"ada n: (ade y: fib(n,y)) @ [/fib]\" --arg 6");
    CHECK(args.code == 0);
    CHECK(args.out == "yes, y=8\n");
}

TEST_CASE("run: trace goes after the answer line") {
    auto r = run_cmd(bin() + " run " + prog("fib_agents.colw") + " --trace 2>/dev/null");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("yes, y=3\n", 0) == 0);
    CHECK(contains(r.out, "MATERIALIZE /a[4]"));
    CHECK(contains(r.out, "FIRE "));
}

TEST_CASE("run: error exit codes") {
    CHECK(run_cmd(bin() + " run " + prog("nope.colw") + " 2>/dev/null").code == 2);
    CHECK(run_cmd(bin() + " run " + prog("fib_buq.colw") + " 2>/dev/null").code == 2);
    auto bad = run_cmd(bin() + " run " + prog("fib_buq.colw") + " --query \"ade :\" 2>&1");
    CHECK(bad.code == 2);
    CHECK(contains(bad.out, "parse error"));
    auto deep = run_cmd(bin() + " run " + prog("fib_buq.colw") +
                        " --query \"ade x: fib(30,x)\" --depth 5 2>&1");
    CHECK(deep.code == 4);
    CHECK(contains(deep.out, "depth"));
    auto missing = run_cmd(bin() + " run " + prog("fib_agents.colw") +
                           " --query \"ada n: (ade y: fib(n,y)) @ [/fib]\" 2>/dev/null");
    CHECK(missing.code == 1);
}

TEST_CASE("check: verdict drives the exit code") {
    auto ok = run_cmd(bin() + " check " + prog("fib_agents.colw"));
    CHECK(ok.code == 0);
    CHECK(contains(ok.out, "/query: VALID - trace:"));
    CHECK(contains(ok.out, "overall: valid\n"));

    auto bad = run_cmd(bin() + " check " + prog("fib_agents_corrupt.colw"));
    CHECK(bad.code == 3);
    CHECK(contains(bad.out, "/c: INVALID - cannot derive: fib(5,999) @ [/fib]"));
    CHECK(contains(bad.out, "overall: invalid\n"));

    auto kv = run_cmd(bin() + " check " + prog("fib_agents_corrupt.colw") + " --kv");
    CHECK(kv.code == 3);
    CHECK(contains(kv.out, "path=/c\tverdict=invalid"));
    CHECK(contains(kv.out, "overall=false\n"));

    auto gated = run_cmd(bin() + " run " + prog("fib_agents_corrupt.colw") +
                         " --check 2>/dev/null");
    CHECK(gated.code == 3);
}

TEST_CASE("repl: a scripted session survives bad input") {
    std::string script = "printf ':load " + prog("fib_buq.colw") +
                         "\\nade x: fib(3,x)\\n:dump\\n:wat\\nthis is not a query\\n:quit\\n'";
    auto r = run_cmd(script + " | " + bin() + " repl 2>/dev/null");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "colweb 0.1.0"));
    CHECK(contains(r.out, "loaded "));
    CHECK(contains(r.out, "yes, x=3"));
    CHECK(contains(r.out, "firings: 0"));
    CHECK(contains(r.out, "agent /fib0 = fib(0,1)."));
    CHECK(contains(r.out, "unknown command: :wat"));
    CHECK(contains(r.out, "error:"));
}

TEST_CASE("repl: loads a file up front and traces on demand") {
    auto r = run_cmd("printf ':trace on\\nade y: fib(4,y) @ [/fib]\\n:check\\n' | " + bin() +
                     " repl " + prog("fib_agents.colw") + " 2>/dev/null");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "yes, y=3"));
    CHECK(contains(r.out, "MATERIALIZE /a[3]"));
    CHECK(contains(r.out, "firings: 2"));
    CHECK(contains(r.out, "overall: valid"));
}
