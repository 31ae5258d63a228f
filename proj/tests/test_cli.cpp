#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <gtest/gtest.h>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DISORDER_CLI;
const fs::path kData = DISORDER_DATA_DIR;

fs::path scratch(const std::string& name) {
    const auto dir = fs::path(::testing::TempDir()) / "disorder_cli";
    fs::create_directories(dir);
    return dir / name;
}

// Runs the CLI with `args`; stdout goes to `out` when given.
int run(const std::string& args, const fs::path& out = {}, const std::string& env = {}) {
    std::string cmd = env + (env.empty() ? "" : " ") + kCli + " " + args;
    cmd += out.empty() ? " > /dev/null" : " > " + out.string();
    cmd += " 2> " + scratch("stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string model(const char* name) { return "--model " + (kData / name).string(); }

fs::path solved(const char* name) {
    const auto table = scratch(std::string(name) + ".tbl");
    EXPECT_EQ(run("solve " + model(name) + " --output " + table.string()), 0);
    return table;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const auto p = scratch(name);
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST(Cli, ValidateExitCodes) {
    EXPECT_EQ(run("validate " + model("two_state.json")), 0);
    const auto bad = write_file("bad_rows.json", R"({"pi": 0, "p": 0.5, "d1": 1, "d2": 1, "states": ["a", "b"],
        "P0": [[0.8, 0.1], [0.2, 0.8]], "P1": [[0.5, 0.5], [0.5, 0.5]], "x0": "a"})");
    const auto out = scratch("validate.txt");
    EXPECT_EQ(run("validate --model " + bad.string(), out), 1);
    EXPECT_NE(slurp(out).find("kernel0 row 0 sums to 0.9"), std::string::npos);
    EXPECT_EQ(run("validate --model " + write_file("broken.json", "{").string()), 2);
    EXPECT_EQ(run("validate --model /nonexistent.json"), 2);
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("validate"), 2);
}

TEST(Cli, SolveAndValue) {
    const auto table = solved("three_state.json");
    EXPECT_NE(slurp(table).find("converged true"), std::string::npos);
    const auto out = scratch("value.txt");
    EXPECT_EQ(run("value " + model("no_information.json"), out), 0);
    EXPECT_NE(slurp(out).find("value 8.7500000000000000e-01"), std::string::npos);
    EXPECT_EQ(run("value " + model("three_state.json") + " --table " + table.string()), 0);
}

TEST(Cli, SolveReportsNonConvergence) {
    const auto slow = write_file("slow.json", R"({"pi": 0, "p": 0.9, "d1": 1, "d2": 1, "states": ["a", "b"],
        "P0": [[0.9, 0.1], [0.2, 0.8]], "P1": [[0.5, 0.5], [0.5, 0.5]], "x0": "a"})");
    EXPECT_EQ(run("solve --model " + slow.string() + " --max-iter 2 --tol 1e-12"), 1);
}

TEST(Cli, DetectStream) {
    const auto table = solved("two_state.json");
    const auto stream = write_file("stream.txt", "x\na\na\nb\nb\na\n");
    const auto out = scratch("detect.json");
    EXPECT_EQ(run("detect " + model("two_state.json") + " --table " + table.string() + " --trace --theta 2 " +
                      stream.string(),
                  out),
              0);
    const auto report = slurp(out);
    EXPECT_NE(report.find("\"stop_time\": 2"), std::string::npos);
    EXPECT_NE(report.find("\"success\": true"), std::string::npos);
    EXPECT_NE(report.find("\"pi_n\""), std::string::npos);

    const auto short_stream = write_file("short.txt", "a\nb\n");
    EXPECT_EQ(run("detect " + model("two_state.json") + " --table " + table.string() + " " + short_stream.string()),
              1);
    const auto bad_stream = write_file("bad_stream.txt", "a\nq\n");
    EXPECT_EQ(run("detect " + model("two_state.json") + " --table " + table.string() + " " + bad_stream.string()),
              2);
    EXPECT_NE(slurp(scratch("stderr.txt")).find("line 2"), std::string::npos);
}

TEST(Cli, DetectRejectsForeignTable) {
    const auto table = solved("two_state.json");
    const auto stream = write_file("stream2.txt", "a\na\nb\n");
    EXPECT_EQ(run("detect " + model("no_information.json") + " --table " + table.string() + " " + stream.string()),
              2);
}

TEST(Cli, Simulate) {
    const auto table = solved("no_information.json");
    const auto csv = scratch("reps.csv");
    const auto out = scratch("summary.json");
    EXPECT_EQ(run("simulate " + model("no_information.json") + " --table " + table.string() +
                      " --reps 1000 --seed 5 --threads 2 --output " + csv.string(),
                  out),
              0);
    EXPECT_NE(slurp(out).find("\"replications\": 1000"), std::string::npos);
    EXPECT_EQ(slurp(csv).rfind("rep,theta,tau,success,undecided\n", 0), 0u);
    EXPECT_EQ(run("simulate " + model("no_information.json") + " --table " + table.string() + " --reps 0"), 2);
}

TEST(Cli, OracleCheck) {
    const auto out = scratch("oracle.txt");
    EXPECT_EQ(run("oracle-check " + model("two_state.json") + " --horizon 5", out), 0);
    EXPECT_NE(slurp(out).find("all gates passed"), std::string::npos);
    EXPECT_EQ(run("oracle-check " + model("two_state.json") + " --horizon 5 --debug-payoff-indexing power-lagged"),
              1);
    EXPECT_EQ(run("oracle-check " + model("three_state.json") + " --horizon 8", {}, "DISORDER_DETECT_BUDGET_MB=1"), 2);
    EXPECT_NE(slurp(scratch("stderr.txt")).find("MB"), std::string::npos);
}
