// colweb command line tool: run queries against a program, check validity,
// or explore interactively.
//
// Exit codes: 0 success, 1 query failed, 2 parse/load error, 3 validity
// failure, 4 resource limit hit while solving.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "colweb/checker.hpp"
#include "colweb/errors.hpp"
#include "colweb/parse.hpp"
#include "colweb/pretty.hpp"
#include "colweb/registry.hpp"
#include "colweb/solver.hpp"

namespace {

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string answer_line(const colweb::Answer& ans) {
    if (!ans.success) return "no";
    std::string line = "yes";
    for (const auto& [name, value] : ans.witnesses)
        line += ", " + name + "=" + std::to_string(value);
    return line;
}

struct RunOpts {
    std::string file;
    std::string query;
    std::vector<std::uint64_t> args;
    colweb::Limits limits;
    std::uint64_t class_sample = 5;
    bool check = false;
    bool trace = false;
    bool dump = false;
};

int cmd_run(const RunOpts& opt) {
    auto text = read_file(opt.file);
    if (!text) {
        std::cerr << "cannot open " << opt.file << "\n";
        return 2;
    }
    colweb::Registry reg;
    std::optional<colweb::Formula> query;
    try {
        reg = colweb::load(colweb::parse_program(*text));
        if (!opt.query.empty()) {
            query = colweb::parse_query(opt.query);
        } else {
            auto it = reg.agents.find(colweb::AgentKey{"query", std::nullopt});
            if (it == reg.agents.end()) {
                std::cerr << "no query given and no /query agent in " << opt.file << "\n";
                return 2;
            }
            query = it->second.knowledge;
        }
    } catch (const colweb::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    if (opt.check) {
        auto report = colweb::check_program(reg, opt.class_sample, opt.limits);
        if (!report.overall) {
            std::cerr << report.to_text();
            return 3;
        }
    }
    colweb::Engine engine(reg, opt.limits);
    int rc = 0;
    try {
        auto ans = engine.resolve_query(*query, opt.args);
        std::cout << answer_line(ans) << "\n";
        if (!ans.success) rc = 1;
    } catch (const colweb::DepthExceeded& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const colweb::RoundsExceeded& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const colweb::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    if (opt.trace) std::cout << engine.trace().to_text();
    if (opt.dump) std::cout << colweb::snapshot(reg);
    return rc;
}

struct CheckOpts {
    std::string file;
    colweb::Limits limits;
    std::uint64_t class_sample = 5;
    bool kv = false;
};

int cmd_check(const CheckOpts& opt) {
    auto text = read_file(opt.file);
    if (!text) {
        std::cerr << "cannot open " << opt.file << "\n";
        return 2;
    }
    colweb::Registry reg;
    try {
        reg = colweb::load(colweb::parse_program(*text));
    } catch (const colweb::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    auto report = colweb::check_program(reg, opt.class_sample, opt.limits);
    std::cout << (opt.kv ? report.to_kv() : report.to_text());
    return report.overall ? 0 : 3;
}

std::string trimmed(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int cmd_repl(const std::string& file, colweb::Limits limits) {
    colweb::Registry reg;
    if (!file.empty()) {
        auto text = read_file(file);
        if (!text) {
            std::cerr << "cannot open " << file << "\n";
            return 2;
        }
        try {
            reg = colweb::load(colweb::parse_program(*text));
        } catch (const colweb::Error& e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
    }
    bool trace_on = false;
    std::cout << "colweb 0.1.0\n"
              << "commands: :load <file>  :check  :dump  :trace on|off  :quit\n";
    std::string raw;
    while (std::cout << "> " << std::flush, std::getline(std::cin, raw)) {
        std::string line = trimmed(raw);
        if (line.empty()) continue;
        if (line == ":quit" || line == ":q") break;
        try {
            if (line.rfind(":load ", 0) == 0) {
                std::string path = trimmed(line.substr(6));
                auto text = read_file(path);
                if (!text) throw colweb::Error("cannot open " + path);
                reg = colweb::load(colweb::parse_program(*text));
                std::cout << "loaded " << path << "\n";
            } else if (line == ":check") {
                std::cout << colweb::check_program(reg, 5, limits).to_text();
            } else if (line == ":dump") {
                std::cout << colweb::snapshot(reg);
            } else if (line == ":trace on") {
                trace_on = true;
            } else if (line == ":trace off") {
                trace_on = false;
            } else if (line[0] == ':') {
                std::cout << "unknown command: " << line << "\n";
            } else {
                auto query = colweb::parse_query(line);
                colweb::Engine engine(reg, limits);
                auto ans = engine.resolve_query(query);
                std::cout << answer_line(ans) << "\n";
                if (trace_on) std::cout << engine.trace().to_text();
                std::cout << "firings: " << engine.firings() << "\n";
            }
        } catch (const std::exception& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"colweb: agents holding Horn knowledge, queried in context"};
    app.require_subcommand(1);

    RunOpts run;
    auto* run_cmd = app.add_subcommand("run", "load a program and run a query");
    run_cmd->add_option("file", run.file, "program file (.colw)")->required();
    run_cmd->add_option("--query", run.query, "query to run (default: the /query agent)");
    run_cmd->add_option("--arg", run.args, "value for an ada variable, outermost first");
    run_cmd->add_option("--depth", run.limits.depth, "backward-chaining depth limit");
    run_cmd->add_option("--max-rounds", run.limits.rounds, "forward-chaining round limit");
    run_cmd->add_option("--class-sample", run.class_sample, "instances checked per class with --check");
    run_cmd->add_flag("--check", run.check, "check validity before running");
    run_cmd->add_flag("--trace", run.trace, "print the proof trace");
    run_cmd->add_flag("--dump", run.dump, "print the knowledgebase after the query");

    CheckOpts check;
    auto* check_cmd = app.add_subcommand("check", "check every agent's claimed knowledge");
    check_cmd->add_option("file", check.file, "program file (.colw)")->required();
    check_cmd->add_option("--class-sample", check.class_sample, "instances checked per class");
    check_cmd->add_option("--depth", check.limits.depth, "backward-chaining depth limit");
    check_cmd->add_option("--max-rounds", check.limits.rounds, "forward-chaining round limit");
    check_cmd->add_flag("--kv", check.kv, "machine-readable key=value output");

    std::string repl_file;
    colweb::Limits repl_limits;
    auto* repl_cmd = app.add_subcommand("repl", "interactive session");
    repl_cmd->add_option("file", repl_file, "program file to load first");
    repl_cmd->add_option("--depth", repl_limits.depth, "backward-chaining depth limit");
    repl_cmd->add_option("--max-rounds", repl_limits.rounds, "forward-chaining round limit");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) return cmd_run(run);
    if (check_cmd->parsed()) return cmd_check(check);
    return cmd_repl(repl_file, repl_limits);
}
