// Python bindings for the colweb interpreter. A Session owns one registry;
// queries materialize into it, so memoization is visible across calls.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "colweb/checker.hpp"
#include "colweb/errors.hpp"
#include "colweb/parse.hpp"
#include "colweb/pretty.hpp"
#include "colweb/registry.hpp"
#include "colweb/solver.hpp"

namespace py = pybind11;

namespace {

class Session {
public:
    Session() : reg_(colweb::load(colweb::parse_program(""))) {}

    void load_text(const std::string& text) { reg_ = colweb::load(colweb::parse_program(text)); }

    void load_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw colweb::Error("cannot open " + path);
        std::ostringstream os;
        os << in.rdbuf();
        load_text(os.str());
    }

    py::dict query(const std::string& text, const std::vector<std::uint64_t>& args) {
        colweb::Engine engine(reg_, limits_);
        py::dict out;
        try {
            auto ans = engine.resolve_query(colweb::parse_query(text), args);
            out["success"] = ans.success;
            out["witnesses"] = ans.witnesses;
        } catch (...) {
            // Even a thrown query may have left a partial trace behind.
            out["firings"] = engine.firings();
            throw;
        }
        out["firings"] = engine.firings();
        out["trace"] = engine.trace().to_text();
        return out;
    }

    std::string snapshot() const { return colweb::snapshot(reg_); }

    py::dict check(std::uint64_t class_sample) const {
        auto report = colweb::check_program(reg_, class_sample, limits_);
        py::dict out;
        out["overall"] = report.overall;
        out["report"] = report.to_text();
        out["kv"] = report.to_kv();
        return out;
    }

    std::string expand_macro(const std::string& path) {
        colweb::Engine engine(reg_, limits_);
        return colweb::pretty(engine.expand_macro(colweb::parse_path(path)));
    }

    void set_limits(std::uint64_t depth, std::uint64_t rounds) { limits_ = {depth, rounds}; }

private:
    colweb::Registry reg_;
    colweb::Limits limits_;
};

}  // namespace

PYBIND11_MODULE(_colweb, m) {
    m.doc() = "colweb: agents holding Horn knowledge, queried in context";
    m.attr("__version__") = "0.1.0";

    py::class_<Session>(m, "Session")
        .def(py::init<>())
        .def("load_text", &Session::load_text, py::arg("text"))
        .def("load_file", &Session::load_file, py::arg("path"))
        .def("query", &Session::query, py::arg("text"),
             py::arg("args") = std::vector<std::uint64_t>{})
        .def("snapshot", &Session::snapshot)
        .def("check", &Session::check, py::arg("class_sample") = 5)
        .def("expand_macro", &Session::expand_macro, py::arg("path"))
        .def("set_limits", &Session::set_limits, py::arg("depth") = 512,
             py::arg("rounds") = 10000);

    m.def(
        "pretty_program",
        [](const std::string& text) { return colweb::pretty(colweb::parse_program(text)); },
        py::arg("text"), "Parse a program and return its canonical text form.");
    m.def(
        "eval_term",
        [](const std::string& text) { return colweb::eval_term(colweb::parse_term(text)); },
        py::arg("text"), "Evaluate a ground term like \"2+3'\".");
}
