#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct Run {
    int code;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(GABBA_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, {}};
    std::string out;
    std::array<char, 4096> buf{};
    while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
    const int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::filesystem::path tmp(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("gabba_cli_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Cli, SimulateWritesCsvAndSidecar) {
    const auto out = tmp("sim.csv"), js = tmp("sim.json");
    const auto r = cli("simulate --nt 3 --nr 2 --mod qpsk --esno-start 0 --esno-stop 4 --esno-step 2 --trials 500 "
                       "--seed 3 --no-timing --out " + out.string() + " --json " + js.string());
    ASSERT_EQ(r.code, 0);
    std::ifstream f(out);
    std::string line;
    std::getline(f, line);
    EXPECT_EQ(line, "esno_db,ber_sim,ber_analytic,trials,bit_errors,seconds");
    int rows = 0;
    while (std::getline(f, line)) ++rows;
    EXPECT_EQ(rows, 3);
    const auto cfg = nlohmann::json::parse(std::ifstream(js));
    EXPECT_EQ(cfg["K"], 4);
    EXPECT_EQ(cfg["modulation"], "psk4");
    std::filesystem::remove(out);
    std::filesystem::remove(js);
}

TEST(Cli, SimulateIsReproducible) {
    const std::string args = "simulate --nt 2 --esno-start 0 --esno-stop 6 --trials 2000 --seed 9 --no-timing";
    const auto a = cli(args), b = cli(args + " --threads 1");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, AnalyzeCsv) {
    const auto r = cli("analyze --nt 4 --nr 2 --mod qam16 --channel rice:m=2 --profile linear --esno-start 0 "
                       "--esno-stop 10 --esno-step 5 --points 2000");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(first_line(r.out), "esno_db,ber");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
}

TEST(Cli, CapacityCsv) {
    const auto r = cli("capacity --nt 4 --nr 4 --esno-start 0 --esno-stop 10 --esno-step 10 --points 1000");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(first_line(r.out).find("envelope,shannon_simo"), std::string::npos);
}

TEST(Cli, VerifyExitCodes) {
    auto r = cli("verify 16");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
    r = cli("verify 16 --corrupt 8");
    EXPECT_EQ(r.code, 1);
    std::istringstream lines(r.out);
    int fails = 0;
    for (std::string l; std::getline(lines, l);)
        if (l.rfind("FAIL ", 0) == 0) {
            ++fails;
            EXPECT_NE(l.find(" K=8 "), std::string::npos) << l;
        }
    EXPECT_GT(fails, 0);
    EXPECT_NE(r.out.find("FAIL code_construction"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
    for (const char* args : {"", "simulate --K 3 --nt 2", "simulate --nt 5 --K 4", "simulate --mod qam8",
                             "simulate --channel rice:m=0.2", "analyze --profile ramp", "simulate --esno-step 0",
                             "analyze --rho 2", "verify 12", "verify 8 --corrupt 16", "simulate --bogus",
                             "capacity --mod qpsk", "simulate --trials 0", "analyze --points 10"})
        EXPECT_EQ(cli(args).code, 2) << args;
}
