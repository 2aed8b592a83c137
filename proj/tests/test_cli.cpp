#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace {

struct Result {
    int code = -1;
    std::string out;
};

// Runs the CLI through the shell; stderr is folded into the output when asked.
Result cli(const std::string& args, bool with_stderr = true) {
    std::string cmd = std::string("cd " QTL_PROGRAMS_DIR " && SURGERY_CHECK_COLOR=never '") + SURGERY_CHECK_BIN +
                      "' " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string temp_file(const std::string& name, const std::string& text) {
    auto path = std::filesystem::temp_directory_path() / ("surgery_check_test_" + name);
    std::ofstream(path) << text;
    return path.string();
}

}  // namespace

TEST_CASE("motivating scenarios on a 3x2 grid") {
    Result a = cli("check fig_a.qtl --grid 3x2 --mode both");
    CHECK(a.code == 0);
    CHECK(a.out.find("fig_a.qtl: ok") != std::string::npos);

    Result b = cli("check fig_b.qtl --grid 3x2 --mode both");
    CHECK(b.code == 3);
    CHECK(b.out.find("fig_b.qtl:6:1: error:") != std::string::npos);
    CHECK(b.out.find("c0_1") != std::string::npos);
    CHECK(b.out.find("c2_0") != std::string::npos);

    CHECK(cli("check fig_c.qtl --grid 3x2 --mode both").code == 3);
    CHECK(cli("run fig_b.qtl --grid 3x2 --seed 7").code == 4);
    CHECK(cli("run fig_a.qtl --grid 3x2 --seed 7").code == 0);
}

TEST_CASE("emit-commands prints the typing trace") {
    Result r = cli("emit-commands ser_example.qtl --graph path4.graph", false);
    CHECK(r.code == 0);
    CHECK(r.out == "alloc l1\nbranch{\n  alloc l2\n}{\n  alloc l2\n  merge l1 l2\n}\n");
    Result s = cli("emit-commands ser_example.qtl --graph path4.graph --serialized", false);
    CHECK(s.out == "alloc l1\nalloc l2\nfree l2\nalloc l2\nmerge l1 l2\nfree l2\nfree l1\n");
}

TEST_CASE("emit-queries and command dumps") {
    const std::string dump = temp_file("example.cmds", "alloc l1\nalloc l3\nmerge l1 l3\n");
    Result q = cli("emit-queries --commands " + dump + " --graph path4.graph", false);
    CHECK(q.code == 0);
    CHECK(q.out.rfind("remove l1 l2\nremove l2 l3\nremove l3 l4\nconnected? l2 l2 l2 l4\n", 0) == 0);
    CHECK(cli("check --commands " + dump + " --graph path4.graph --mode both").code == 0);

    const std::string blocked = temp_file("blocked.cmds", "alloc l1\nalloc l2\nalloc l3\nmerge l1 l3\n");
    CHECK(cli("check --commands " + blocked + " --graph path4.graph").code == 3);
}

TEST_CASE("exit codes for parse, type and usage errors") {
    CHECK(cli("check " + temp_file("parse.qtl", "let x = in ()") + " --grid 2x2").code == 1);
    CHECK(cli("check " + temp_file("type.qtl", "X(q)") + " --grid 2x2").code == 2);
    CHECK(cli("check fig_a.qtl").code == 5);  // no architecture
    CHECK(cli("check fig_a.qtl --grid 3x2 --graph path4.graph").code != 0);
    CHECK(cli("check fig_a.qtl --grid banana").code == 5);
    const std::string loop = temp_file("loop.qtl", "let r = mkref true in while *r do ()");
    CHECK(cli("run " + loop + " --grid 2x2 --fuel 50").code == 5);
}

TEST_CASE("cx program runs and checks") {
    CHECK(cli("check cx.qtl --grid 3x1 --mode both").code == 0);
    Result r = cli("run cx.qtl --grid 3x1 --script 010 --trace");
    CHECK(r.code == 0);
    CHECK(r.out.find("E-Call") != std::string::npos);
    CHECK(cli("run cx.qtl --grid 3x1 --script 0").code == 5);  // script too short
}

TEST_CASE("json output and multiple files") {
    Result r = cli("check fig_a.qtl fig_b.qtl --grid 3x2 --json -j 2", false);
    CHECK(r.code == 3);  // worst file wins
    std::istringstream lines(r.out);
    std::string line;
    int seen = 0;
    while (std::getline(lines, line)) {
        auto j = nlohmann::json::parse(line);
        ++seen;
        for (const char* key : {"file", "verdict", "exit_code", "command_size", "serialized_size", "query_count",
                                "timings_ms"}) {
            CHECK(j.contains(key));
        }
        if (j["file"] == "fig_b.qtl") {
            CHECK(j["verdict"] == "violation");
            CHECK(j["violation"]["endpoints"] == nlohmann::json::array({"c0_1", "c2_0"}));
        } else {
            CHECK(j["verdict"] == "accepted");
            CHECK(j["exit_code"] == 0);
        }
    }
    CHECK(seen == 2);
}

TEST_CASE("both mode agrees on every example program") {
    for (const char* f : {"fig_a.qtl", "fig_b.qtl", "fig_c.qtl"}) {
        CHECK(cli(std::string("check ") + f + " --grid 3x2 --mode both").code != 70);
    }
    CHECK(cli("check ser_example.qtl --graph path4.graph --mode both").code != 70);
}
