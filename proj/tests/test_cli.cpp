#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <fstream>
#include <string>

#include "test_util.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(QSHIELD_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string spec_path(const char* name) { return std::string(QSHIELD_SPEC_DIR) + "/" + name; }

std::string temp_dir(const char* tag) {
    std::string dir = std::string("cli_scratch_") + tag;
    int rc = std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
    REQUIRE(rc == 0);
    return dir;
}

} // namespace

TEST_CASE("cli compile emits dfa and dot files") {
    std::string dir = temp_dir("compile");
    RunResult r = run_cli("compile " + spec_path("until5_v2k1_nodm.qs") + " --formula req --out " + dir);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("states:") != std::string::npos);
    CHECK(std::ifstream(dir + "/req.dfa").good());
    CHECK(std::ifstream(dir + "/req.dot").good());
}

TEST_CASE("cli synth writes controller artifacts and stats") {
    std::string dir = temp_dir("synth");
    RunResult r = run_cli("synth " + spec_path("until5_v2k1_nodm.qs") + " --out " + dir);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("shield_states = 14") != std::string::npos);
    CHECK(std::ifstream(dir + "/controller.table").good());
    CHECK(std::ifstream(dir + "/controller.dot").good());
    CHECK(std::ifstream(dir + "/req_io.dfa").good());
    CHECK(std::ifstream(dir + "/stats.txt").good());
}

TEST_CASE("cli synth reports unrealizable specs with exit code 2") {
    RunResult r = run_cli("synth " + spec_path("until5_v1k1_nodm.qs"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("unrealizable") != std::string::npos);
}

TEST_CASE("cli analyze prints the expected value and latency") {
    RunResult r = run_cli("analyze " + spec_path("until5_v2k1_nodm.qs"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("expected_value = 0.7142792") != std::string::npos);
    CHECK(r.output.find("latency = 1") != std::string::npos);
    CHECK(r.output.find("maxlen = 0") != std::string::npos);
}

TEST_CASE("cli analyze float mode agrees with exact mode") {
    RunResult exact = run_cli("analyze " + spec_path("until5_v2k3_nodm.qs"));
    RunResult fl = run_cli("analyze " + spec_path("until5_v2k3_nodm.qs") + " --float");
    CHECK(exact.exit_code == 0);
    CHECK(fl.exit_code == 0);
    CHECK(exact.output.find("expected_value = 0.5982051") != std::string::npos);
    CHECK(fl.output.find("expected_value = 0.5982051") != std::string::npos);
}

TEST_CASE("cli flags override the spec file") {
    // dm off in the file, switched on via flags
    RunResult r = run_cli("analyze " + spec_path("until5_v0_nodm.qs") +
                          " --horizon 10 --order \"!q' !p'\"");
    CHECK(r.exit_code == 0);
    // still the NoDM shield: dm stays off unless the file enables it
    CHECK(r.output.find("expected_value = 0.2500000") != std::string::npos);
}

TEST_CASE("cli spec errors exit with code 3") {
    std::string dir = temp_dir("bad");
    {
        std::ofstream f(dir + "/bad.qs");
        f << "inputs: a\nsse_outputs: b\nshield_outputs: b'\nreq: <zz>\norder: !b'\n";
    }
    RunResult r = run_cli("compile " + dir + "/bad.qs --formula req");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("spec error") != std::string::npos);
}

TEST_CASE("cli capacity bound exits with code 4") {
    RunResult r = run_cli("synth " + spec_path("until5_v3e1d3_nodm.qs") + " --max-states 8");
    CHECK(r.exit_code == 4);
    CHECK(r.output.find("capacity") != std::string::npos);
}

TEST_CASE("cli run reproduces the published behaviour row") {
    using namespace qshield;
    std::string dir = temp_dir("run");
    {
        std::ofstream spec(dir + "/figure.qs");
        spec << "inputs: r\nsse_outputs: p q\nshield_outputs:\n";
        std::ofstream trace(dir + "/trace.txt");
        Trace t = testutil::rpq_trace();
        for (std::size_t i = 0; i < t.size(); ++i)
            trace << t.at(i).value("r") << ' ' << t.at(i).value("p") << ' '
                  << t.at(i).value("q") << "\n";
    }
    RunResult r = run_cli("run " + dir + "/figure.qs --formula \"phi_until(3)\" --trace " +
                          dir + "/trace.txt");
    CHECK(r.exit_code == 0);
    std::vector<bool> want = testutil::rpq_phi_until3_row();
    std::istringstream out(r.output);
    std::string header;
    std::getline(out, header);
    CHECK(header.find("vars: r p q") != std::string::npos);
    std::size_t pos;
    int bit;
    std::size_t n = 0;
    while (out >> pos >> bit) {
        REQUIRE(pos < want.size());
        CHECK_MESSAGE(bit == (want[pos] ? 1 : 0), "position ", pos);
        ++n;
    }
    CHECK(n == want.size());
}

TEST_CASE("cli exec round trip over the line protocol") {
    std::string dir = temp_dir("exec");
    RunResult s = run_cli("synth " + spec_path("passthrough.qs") + " --out " + dir);
    REQUIRE(s.exit_code == 0);
    {
        std::ofstream in(dir + "/input.txt");
        in << "0 1 1\n1 0 1\n0 0 0\n";
    }
    std::string cmd = "exec --table " + dir + "/controller.table --monitor " + dir +
                      "/req_io.dfa < " + dir + "/input.txt";
    RunResult r = run_cli(cmd);
    CHECK(r.exit_code == 0);
    // pass-through: outputs echo the trailing O bits, never deviating
    CHECK(r.output.find("1 1 dev=0 ok=1") != std::string::npos);
    CHECK(r.output.find("0 1 dev=0 ok=1") != std::string::npos);
    CHECK(r.output.find("0 0 dev=0 ok=1") != std::string::npos);
    CHECK(r.output.find("steps=3 deviations=0") != std::string::npos);
}

TEST_CASE("cli export-mrmc validates row sums") {
    std::string dir = temp_dir("mrmc");
    RunResult r = run_cli("export-mrmc " + spec_path("until5_v2k1_nodm.qs") +
                          " --validate --out " + dir);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("validated: every row sums to 1") != std::string::npos);
    std::ifstream tra(dir + "/chain.tra");
    REQUIRE(tra.good());
    std::string first;
    std::getline(tra, first);
    CHECK(first.rfind("STATES", 0) == 0);
    CHECK(std::ifstream(dir + "/chain.lab").good());
}

TEST_CASE("cli simulate is reproducible for a fixed seed") {
    RunResult a = run_cli("simulate " + spec_path("until5_v2k1_nodm.qs") +
                          " --steps 5000 --seed 11");
    RunResult b = run_cli("simulate " + spec_path("until5_v2k1_nodm.qs") +
                          " --steps 5000 --seed 11");
    CHECK(a.exit_code == 0);
    CHECK(a.output == b.output);
    CHECK(a.output.find("non_deviation_freq") != std::string::npos);
}

TEST_CASE("cli --no-dm override and hdc compilation") {
    RunResult r = run_cli("analyze " + spec_path("until5_v0_dm_h10.qs") + " --no-dm");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("dm = off") != std::string::npos);
    CHECK(r.output.find("expected_value = 0.2500000") != std::string::npos);

    std::string dir = temp_dir("hdc");
    RunResult c = run_cli("compile " + spec_path("until5_v2k1_nodm.qs") +
                          " --formula hdc --out " + dir);
    CHECK(c.exit_code == 0);
    CHECK(c.output.find("vars: SSEOK Deviation") != std::string::npos);
    CHECK(std::ifstream(dir + "/hdc.dfa").good());
}

TEST_CASE("cli missing file exits with the spec-error code") {
    RunResult r = run_cli("analyze /nonexistent/nowhere.qs");
    CHECK(r.exit_code == 3);
}
