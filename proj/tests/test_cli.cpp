#include "chemo/cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace chemo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("chemo_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

ErrorCode parse_code(const std::string& text, std::string* message = nullptr)
{
    try {
        parse_config(text);
    }
    catch (const Error& e) {
        if (message)
            *message = e.what();
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

int run_binary(const fs::path& config, const fs::path& out, const std::string& extra = "")
{
    fs::create_directories(out);
    const std::string cmd = std::string("\"") + CHEMO_CLI_PATH + "\" --config \"" + config.string() + "\" --out \"" +
                            out.string() + "\" " + extra + " > \"" + (out / "stderr.txt").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
#ifdef WEXITSTATUS
    return WEXITSTATUS(status);
#else
    return status;
#endif
}

const char* kClassify = R"(command = classify
[params]
alpha = 1
beta = 2
gamma = 0
theta = -1
m1 = 30
m2 = 4
)";

} // namespace

TEST_CASE("parse_config fills defaults")
{
    const auto cfg = parse_config(kClassify);
    CHECK(cfg.command == Command::Classify);
    CHECK(cfg.grid_n == 4096);
    CHECK(cfg.params.beta == 2.0);
    CHECK(cfg.params.m2 == 4.0);
    CHECK(cfg.solve.tol == 1e-10);

    const auto s = parse_config("command = sweep\n[params]\nalpha = 1\nbeta = 2\ngamma = 1\n"
                                "[sweep]\nm1_range = [0.1, 40]\nresolution = 200  # cells per axis\n");
    CHECK(s.command == Command::Sweep);
    CHECK(s.resolution == 200);
    CHECK(s.m1_range.lo == 0.1);
    CHECK(s.m1_range.hi == 40.0);
}

TEST_CASE("parse_config rejects bad input with a location")
{
    std::string msg;
    CHECK(parse_code("command = classify\n[params]\ntheta = 0\n", &msg) == ErrorCode::BadTheta);
    CHECK(parse_code("command = classify\n[params]\nalpah = 1\n", &msg) == ErrorCode::UnknownKey);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("params.alpah") != std::string::npos);
    CHECK(parse_code("command = classify\n[nonsense]\n") == ErrorCode::UnknownKey);
    CHECK(parse_code("command = classify\n[params]\nm1 = 3x\n", &msg) == ErrorCode::ParseError);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(parse_code("command = classify\ncommand = sweep\n") == ErrorCode::ParseError);
    CHECK(parse_code("[params]\nm1 = 3\n") == ErrorCode::ParseError);
    CHECK(parse_code("command = teleport\n") == ErrorCode::ParseError);
    CHECK(parse_code("command = classify\n[grid]\nn = 4\n") == ErrorCode::TooCoarse);
    CHECK(parse_code("command = flow\n[flow]\ndelta1 = 0.5\n") == ErrorCode::BadFlowConfig);
}

TEST_CASE("echo_config round-trips")
{
    const auto cfg = parse_config("command = flow\n[params]\nalpha = 1\nbeta = 0.1\ngamma = 2\nm1 = 3.3\nm2 = 1\n"
                                  "[flow]\ndelta1 = 0\nepsilon = 1\ndt = 0.001\n[blowdown]\npsi = [2, 4, 8, 16]\n");
    const auto text = echo_config(cfg);
    CHECK(echo_config(parse_config(text)) == text);
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(-1.5e-300) == "-1.5000000000000001e-300");
}

TEST_CASE("exit codes")
{
    CHECK(exit_code(ErrorCode::SolverDiverged) == kExitDiverged);
    CHECK(exit_code(ErrorCode::Stalled) == kExitDiverged);
    CHECK(exit_code(ErrorCode::UnknownKey) == kExitConfig);
    CHECK(exit_code(ErrorCode::Supercritical) == kExitConfig);
}

TEST_CASE("classify writes the verdict row")
{
    const auto dir = scratch("classify");
    std::ostringstream err;
    CHECK(run(parse_config(kClassify), RunContext{dir, 1, 0}, err) == kExitOk);
    const auto text = slurp(dir / "classify.csv");
    CHECK(text.rfind("# chemo ", 0) == 0);
    CHECK(text.find("# command = classify") != std::string::npos);
    CHECK(text.find("m1,m2,verdict,rule_fired,lambda,lambda1,lambda2") != std::string::npos);
    CHECK(text.find("30,4,RadiallyBounded,3,") != std::string::npos);
}

TEST_CASE("steady solves a subcritical single-species problem")
{
    const auto dir = scratch("steady");
    const auto cfg = parse_config("command = steady\n[params]\nalpha = 1\nm1 = 12.566370614359172\n"
                                  "[grid]\nn = 512\n[solver]\ndamping = 1\nmax_iter = 20000\n");
    std::ostringstream err;
    REQUIRE(run(cfg, RunContext{dir, 1, 0}, err) == kExitOk);
    std::istringstream summary(slurp(dir / "steady_summary.csv"));
    std::string line, header, values;
    while (std::getline(summary, line))
        if (!line.empty() && line[0] != '#') {
            if (header.empty())
                header = line;
            else
                values = line;
        }
    CHECK(header.rfind("residual1,residual2,", 0) == 0);
    CHECK(std::stod(values.substr(0, values.find(','))) <= 1e-10);
    CHECK(slurp(dir / "steady.csv").find("r,u1,u2,rho1,rho2,residual1,residual2") != std::string::npos);
}

TEST_CASE("oracle writes one row per psi")
{
    const auto dir = scratch("oracle");
    const auto cfg = parse_config("command = oracle\n[oracle]\ngamma = 1\nbeta_m = 31.415926535897932\n"
                                  "m2 = 6.283185307179586\npsi = [1e-4, 1e-6]\n");
    std::ostringstream err;
    REQUIRE(run(cfg, RunContext{dir, 1, 0}, err) == kExitOk);
    const auto text = slurp(dir / "oracle.csv");
    CHECK(text.find("psi,ratio,limit,rel_err") != std::string::npos);
    int rows = 0;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);)
        rows += !line.empty() && line[0] != '#';
    CHECK(rows == 3);
}

TEST_CASE("outputs are byte-identical across runs and thread counts")
{
    const auto a = scratch("det_a"), b = scratch("det_b");
    const auto cfg = parse_config("command = sweep\n[params]\nalpha = 1\nbeta = 2\ngamma = 1\n"
                                  "[sweep]\nresolution = 40\n");
    std::ostringstream err;
    REQUIRE(run(cfg, RunContext{a, 1, 0}, err) == kExitOk);
    REQUIRE(run(cfg, RunContext{b, 4, 0}, err) == kExitOk);
    for (const char* f : {"sweep.csv", "curves.csv", "sweep_summary.csv"})
        CHECK(slurp(a / f) == slurp(b / f));

    const auto fa = scratch("flow_a"), fb = scratch("flow_b");
    const auto flow = parse_config("command = flow\n[params]\nalpha = 1\nbeta = 1\ngamma = 2\nm1 = 6\nm2 = 3\n"
                                   "[grid]\nn = 128\n[density]\nperturb = 0.5\n[flow]\nt_end = 0.05\n");
    REQUIRE(run(flow, RunContext{fa, 1, 42}, err) == kExitOk);
    REQUIRE(run(flow, RunContext{fb, 3, 42}, err) == kExitOk);
    CHECK(slurp(fa / "flow_trace.csv") == slurp(fb / "flow_trace.csv"));
    CHECK(slurp(fa / "flow_trace.csv").find("t,m1,m2,energy,sup_rho1") != std::string::npos);
}

TEST_CASE("the binary maps failures to exit codes")
{
    const auto dir = scratch("binary");
    const auto good = dir / "good.cfg";
    std::ofstream(good) << kClassify;
    CHECK(run_binary(good, dir / "out", "--threads 2") == 0);
    CHECK(fs::exists(dir / "out" / "classify.csv"));

    const auto bad = dir / "bad.cfg";
    std::ofstream(bad) << "command = classify\n[params]\nwho = 1\n";
    CHECK(run_binary(bad, dir) == 3);
    CHECK(slurp(dir / "stderr.txt").find("unknown key") != std::string::npos);

    CHECK(run_binary(dir / "missing.cfg", dir) == 3);

    const auto diverge = dir / "diverge.cfg";
    std::ofstream(diverge) << "command = steady\n[params]\nalpha = 1\nm1 = 20\n[grid]\nn = 64\n"
                              "[solver]\nmax_iter = 2\nmax_continuation_steps = 1\n";
    CHECK(run_binary(diverge, dir) == 2);

    const auto super = dir / "super.cfg";
    std::ofstream(super) << "command = steady\n[params]\nalpha = 1\nm1 = 30\n[grid]\nn = 64\n";
    CHECK(run_binary(super, dir) == 3);
}
