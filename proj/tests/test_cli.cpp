#include <doctest.h>

#include <dynlap/config.hpp>
#include <dynlap/error.hpp>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

using namespace dynlap;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string output;
};

Result run_cli(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + " '" + DYNLAP_CLI_PATH + "' " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe) != nullptr) {
        out += buf;
    }
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("dynlap_cli_" + std::to_string(getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const std::string kIdentity = std::string(" -c '") + DYNLAP_SOURCE_DIR + "/configs/identity.conf' -q";

} // namespace

TEST_CASE("config text parsing")
{
    std::istringstream in("# comment\n  months = 12  \n\nseed=3 # trailing\nsynth_vortices = 1,2,3,4,5,6; 7,8,9,10,11,12\n");
    const auto kv = parse_config_text(in);
    CHECK(kv.at("months") == "12");
    CHECK(kv.at("seed") == "3");
    CHECK(kv.at("synth_vortices") == "1,2,3,4,5,6; 7,8,9,10,11,12");

    std::istringstream bad("months = 12\nnot a pair\n");
    try {
        parse_config_text(bad, "x.conf");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("x.conf") != std::string::npos);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("config layering and defaults")
{
    CHECK_THROWS_AS(build_config({}), Error);  // no input files and no synthetic flow
    const RunConfig d = build_config({{{"synthetic", "identity"}}});
    CHECK(d.months == 72);
    CHECK(d.day_first == 1);
    CHECK(d.day_last == 12);
    CHECK(d.coastline_stride == 5);
    CHECK(d.eig_count == 8);
    CHECK(d.grid_spacing == 1.0);
    CHECK(d.c_step == 0.01);
    CHECK(d.display_month == 36);

    const RunConfig c =
        build_config({{{"synthetic", "identity"}, {"months", "24"}, {"display_month", "12"}, {"eig_count", "3"}},
                      {{"eig_count", "5"}}});
    CHECK(c.months == 24);
    CHECK(c.eig_count == 5);
    CHECK(c.synth.months == 24);

    CHECK_THROWS_AS(build_config({{{"synthetic", "identity"}, {"no_such_key", "1"}}}), Error);
    CHECK_THROWS_AS(build_config({{{"synthetic", "identity"}, {"months", "many"}}}), Error);
    CHECK_THROWS_AS(build_config({{{"synthetic", "identity"}, {"eig_count", "0"}}}), Error);
    CHECK_THROWS_AS(build_config({{{"synthetic", "identity"}, {"months", "10"}, {"display_month", "11"}}}), Error);
    CHECK_NOTHROW(build_config({{{"synthetic", "identity"}, {"months", "10"}, {"display_month", "10"}}}));

    // Every key appears in the echo, in table order.
    const auto echo = config_echo(d);
    REQUIRE(echo.size() == config_keys().size());
    for (std::size_t k = 0; k < echo.size(); ++k) {
        CHECK(echo[k].first == config_keys()[k].name);
    }
}

TEST_CASE("cli help and exit codes")
{
    const auto help = run_cli("--help");
    CHECK(help.code == 0);
    CHECK(help.output.find("precedence") != std::string::npos);
    CHECK(help.output.find("eig_count") != std::string::npos);
    CHECK(help.output.find("run") != std::string::npos);

    CHECK(run_cli("bogus").code == 2);
    CHECK(run_cli("run -s nonsense").code == 2);

    const fs::path out = scratch("exit");
    const auto zero_k = run_cli("run" + kIdentity + " -s eig_count=0 -s output_dir=" + out.string());
    CHECK(zero_k.code == 2);
    CHECK(zero_k.output.find("eig_count") != std::string::npos);

    const auto missing = run_cli("solve" + kIdentity + " -s output_dir=" + out.string());
    CHECK(missing.code == 4);
    CHECK(missing.output.find("missing artifact") != std::string::npos);
    CHECK(missing.output.find("produced by the 'ingest' stage") != std::string::npos);

    const auto no_input = run_cli("run -q -s output_dir=" + out.string() + " -s input_floats=/nonexistent/f.csv " +
                                  "-s input_coastline=/nonexistent/c.csv");
    CHECK(no_input.code == 4);
    CHECK(fs::exists(out / "FAILED"));

    const auto no_conv = run_cli("run" + kIdentity + " -s eig_max_iter=1 -s output_dir=" + out.string());
    CHECK(no_conv.code == 3);
    CHECK(slurp(out / "FAILED").find("solve") != std::string::npos);
}

TEST_CASE("cli precedence: file, then environment, then --set")
{
    const fs::path out = scratch("precedence");
    const auto r = run_cli("run" + kIdentity + " -s months=3 -s eig_count=2 -s output_dir=" + out.string(),
                           "DYNLAP_EIG_COUNT=1 DYNLAP_SEED=42");
    REQUIRE(r.code == 0);
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["config"]["eig_count"] == "2");  // --set beats the environment
    CHECK(manifest["config"]["seed"] == "42");      // environment beats the file
    CHECK(manifest["config"]["grid_spacing"] == "0.025");  // file beats the default
    CHECK(manifest["status"] == "ok");
    CHECK_FALSE(fs::exists(out / "FAILED"));
}

TEST_CASE("stage subcommands compose to the same artifacts as run")
{
    const fs::path a = scratch("whole");
    const fs::path b = scratch("staged");
    REQUIRE(run_cli("run" + kIdentity + " -s output_dir=" + a.string()).code == 0);
    for (const char* stage : {"synth", "ingest", "mesh", "assemble", "solve", "seba", "sets", "diag"}) {
        REQUIRE(run_cli(std::string(stage) + kIdentity + " -s output_dir=" + b.string()).code == 0);
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        const auto ext = entry.path().extension();
        if (ext != ".csv" && ext != ".geojson" && ext != ".txt") {
            continue;
        }
        const auto rel = fs::relative(entry.path(), a);
        INFO(rel.string());
        REQUIRE(fs::exists(b / rel));
        CHECK(slurp(entry.path()) == slurp(b / rel));
        ++compared;
    }
    CHECK(compared > 10);

    // A single-month mesh run rewrites just that month.
    const fs::path one = b / "mesh" / "month_002_triangles.csv";
    const std::string before = slurp(one);
    fs::remove(one);
    REQUIRE(run_cli("mesh --month 2" + kIdentity + " -s output_dir=" + b.string()).code == 0);
    CHECK(slurp(one) == before);
    CHECK(run_cli("mesh --month 9" + kIdentity + " -s output_dir=" + b.string()).code == 2);
}
