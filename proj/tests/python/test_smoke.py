import os

import pytest

import colweb


def program(name: str) -> str:
    with open(os.path.join(os.environ["COLWEB_PROGRAMS"], name)) as f:
        return f.read()


def test_version():
    assert colweb.__version__ == "0.1.0"


def test_eval_term():
    assert colweb.eval_term("2+3'") == 6


def test_pretty_program_roundtrip():
    text = program("fib_agents.colw")
    canon = colweb.pretty_program(text)
    assert colweb.pretty_program(canon) == canon


def test_front_door_query_and_memoization():
    s = colweb.Session()
    s.load_text(program("fib_agents.colw"))
    r = s.query("(ade y: fib(4,y)) @ [/fib]")
    assert r["success"]
    assert r["witnesses"] == [("y", 3)]
    assert r["firings"] == 2
    assert "agent /a[4] = fib(4,3)." in s.snapshot()

    again = s.query("(ade y: fib(4,y)) @ [/fib]")
    assert again["success"]
    assert again["firings"] == 0


def test_query_with_argument():
    s = colweb.Session()
    s.load_text(program("fib_agents.colw"))
    r = s.query("ada n: (ade y: fib(n,y)) @ [/fib]", [6])
    assert r["success"]
    assert r["witnesses"] == [("y", 8)]


def test_check_reports():
    s = colweb.Session()
    s.load_text(program("fib_agents.colw"))
    assert s.check()["overall"]

    s.load_text(program("fib_agents_corrupt.colw"))
    bad = s.check()
    assert not bad["overall"]
    assert "/c: INVALID" in bad["report"]
    assert "overall=false" in bad["kv"]


def test_expand_macro():
    s = colweb.Session()
    s.load_text(program("m_chain.colw"))
    assert s.expand_macro("/m[0''']") == "p & (p & (p & q))"


def test_errors_surface_as_exceptions():
    s = colweb.Session()
    with pytest.raises(RuntimeError):
        s.load_text("agent /a = p")  # missing final dot
    s.load_text(program("fib_buq.colw"))
    with pytest.raises(RuntimeError):
        s.query("fib(3,x)")  # free variable
