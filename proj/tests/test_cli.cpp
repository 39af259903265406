#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "gmt/cli.hpp"

using namespace gmt;
using io::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gmt_test_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
    args.insert(args.begin(), "gmt");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream log, err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), log, err);
    if (err_text) *err_text = err.str();
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

const std::string kExp = R"({"type": "exponential", "alpha": 1})";

}  // namespace

TEST_CASE("psd-check exit codes") {
    const fs::path d = fresh_dir("psd");
    CHECK(run({"psd-check", "--kernel", kExp, "--out", d.string()}) == cli::kSuccess);
    CHECK(read_json(d / "psd_report.json").at("pass") == true);
    CHECK(run({"psd-check", "--kernel", R"({"type": "constant"})", "--out", d.string()}) == cli::kSuccess);

    const std::string bad = R"({"type": "combination", "terms": [{"weight": 2, "kernel": {"type": "white_noise"}},
                                 {"weight": -1, "kernel": {"type": "constant"}}]})";
    CHECK(run({"psd-check", "--kernel", bad, "--grid", "0:2:3", "--out", d.string()}) == cli::kFailure);
    const json r = read_json(d / "psd_report.json");
    CHECK(r.at("pass") == false);
    CHECK(r.at("grids")[0].at("min_eigenvalue").get<double>() == doctest::Approx(-1.0));

    CHECK(run({"psd-check", "--kernel", R"({"type": "mystery"})", "--out", d.string()}) == cli::kUsage);
    CHECK(run({"psd-check", "--out", d.string()}) == cli::kUsage);
    CHECK(run({"psd-check", "--kernel", kExp, "--grid", "0:1", "--out", d.string()}) == cli::kUsage);
    CHECK(run({"psd-check", "--kernel", kExp, "--bogus"}) == cli::kUsage);
    CHECK(run({}) == cli::kUsage);
}

TEST_CASE("transform table") {
    const fs::path d = fresh_dir("transform");
    REQUIRE(run({"transform", "--kernel", R"({"type": "fbm", "hurst": 0.75})", "--grid", "1:2:3", "--out",
                 d.string()}) == cli::kSuccess);
    for (const auto& row : read_csv(d / "transform.csv"))
        CHECK(row[3] == doctest::Approx(std::pow(row[0] * row[1], 0.75)).epsilon(1e-12));

    REQUIRE(run({"transform", "--kernel", kExp, "--grid", "0:3:4", "--out", d.string()}) == cli::kSuccess);
    for (const auto& row : read_csv(d / "transform.csv")) CHECK(row[3] == doctest::Approx(row[2]).epsilon(1e-14));

    REQUIRE(run({"transform", "--kernel", R"({"type": "noise_integral"})", "--grid", "0.5:3:4", "--out", d.string()}) ==
            cli::kSuccess);
    for (const auto& row : read_csv(d / "transform.csv")) CHECK(row[3] == doctest::Approx(1.0).epsilon(1e-9));

    // A rate that turns negative is a numerical failure.
    CHECK(run({"transform", "--kernel", kExp, "--alpha", R"({"type": "linear", "intercept": 1, "slope": -1})",
               "--grid", "0:4:3", "--out", d.string()}) == cli::kFailure);
}

TEST_CASE("converge tables") {
    const fs::path d = fresh_dir("converge");
    REQUIRE(run({"converge", "--kernel", kExp, "--target", kExp, "--out", d.string()}) == cli::kSuccess);
    for (const auto& row : read_csv(d / "converge.csv")) CHECK(row[1] < 1e-13);

    REQUIRE(run({"converge", "--kernel", R"({"type": "fbm_log", "hurst": 0.75})", "--target", R"({"type": "constant"})",
                 "--mesh-sequence", "2^-3,2^-6,2^-9", "--out", d.string()}) == cli::kSuccess);
    const auto rows = read_csv(d / "converge.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] == 0.125);
    CHECK(rows[1][1] < rows[0][1]);
    CHECK(rows[2][1] < rows[1][1]);

    REQUIRE(run({"converge", "--kernel", kExp, "--mode", "global", "--mesh-sequence", "0.5,0.25", "--grid", "0:1:3",
                 "--out", d.string()}) == cli::kSuccess);
    CHECK(slurp(d / "converge.csv").rfind("n,distance", 0) == 0);
    CHECK(run({"converge", "--kernel", kExp, "--mode", "sideways", "--out", d.string()}) == cli::kUsage);
}

TEST_CASE("counterexample artifacts and budget exit") {
    const fs::path d = fresh_dir("counter");
    REQUIRE(run({"counterexample", "--out", d.string()}) == cli::kSuccess);
    const auto idx = read_csv(d / "indices.csv");
    REQUIRE(idx.size() == 7);
    const std::vector<double> expected{2, 3, 4, 9, 14, 8701, 253744};
    for (std::size_t j = 0; j < idx.size(); ++j) {
        CHECK(idx[j][1] == expected[j]);
        if (j > 0) CHECK(idx[j][5] == 1.0);
    }
    CHECK(fs::exists(d / "measure.json"));
    CHECK(fs::exists(d / "sequence.csv"));
    for (const auto& w : read_csv(d / "witnesses.csv")) CHECK(w[4] == 1.0);

    const fs::path b = fresh_dir("budget");
    CHECK(run({"counterexample", "--i-max", "4", "--out", b.string()}) == cli::kBudget);
    CHECK(read_csv(b / "indices.csv").size() == 7);
    CHECK(fs::exists(b / "witnesses.csv"));
    CHECK(run({"counterexample", "--k-cut", "1", "--out", b.string()}) == cli::kUsage);
}

TEST_CASE("simulate modes") {
    const fs::path d = fresh_dir("simulate");
    REQUIRE(run({"simulate", "--paths", "2000", "--grid", "0:2:3", "--out", d.string()}) == cli::kSuccess);
    const json s = read_json(d / "summary.json");
    CHECK(s.at("pass") == true);
    CHECK(fs::exists(d / "sde_paths.csv"));
    CHECK(read_csv(d / "gaussian_paths.csv").size() == 100);

    for (const std::string mode : {"cholesky", "ou", "em"}) {
        REQUIRE(run({"simulate", "--mode", mode, "--paths", "500", "--grid", "0:1:3", "--step", "1e-2", "--export-paths",
                     "7", "--out", d.string()}) == cli::kSuccess);
        CHECK(read_csv(d / "trajectories.csv").size() == 7);
    }
    CHECK(run({"simulate", "--mode", "other", "--out", d.string()}) == cli::kUsage);
    CHECK(run({"simulate", "--paths", "1", "--out", d.string()}) == cli::kUsage);
}

TEST_CASE("reruns are byte-identical") {
    const std::vector<std::vector<std::string>> commands{
        {"psd-check", "--kernel", kExp},
        {"transform", "--kernel", R"({"type": "fbm", "hurst": 0.3})"},
        {"converge", "--kernel", R"({"type": "fbm_log", "hurst": 0.6})", "--mesh-sequence", "2^-2,2^-5"},
        {"simulate", "--mode", "cholesky", "--paths", "300"},
        {"simulate", "--paths", "300", "--grid", "0:1:3", "--step", "1e-2"},
    };
    int i = 0;
    for (auto args : commands) {
        const fs::path a = fresh_dir("rerun_a" + std::to_string(i));
        const fs::path b = fresh_dir("rerun_b" + std::to_string(i++));
        auto with_out = [&](const fs::path& o) {
            auto v = args;
            v.push_back("--out");
            v.push_back(o.string());
            return v;
        };
        REQUIRE(run(with_out(a)) == cli::kSuccess);
        REQUIRE(run(with_out(b)) == cli::kSuccess);
        for (const auto& e : fs::directory_iterator(a)) CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
}

TEST_CASE("config precedence: defaults < config file < flags") {
    const fs::path d = fresh_dir("precedence");
    const fs::path cfg = d / "cfg.json";
    {
        std::ofstream out(cfg);
        out << json{{"kernel", json::parse(kExp)}, {"mode", "cholesky"}, {"paths", 40}, {"seed", 7},
                    {"grid", "0:1:2"}, {"out", d.string()}}
                   .dump();
    }
    REQUIRE(run({"simulate", "--config", cfg.string()}) == cli::kSuccess);
    json s = read_json(d / "summary.json");
    CHECK(s.at("paths") == 40);
    CHECK(s.at("seed") == 7);
    CHECK(s.at("step") == 1e-3);
    CHECK(s.at("grid").size() == 2);

    REQUIRE(run({"simulate", "--config", cfg.string(), "--seed", "9", "--grid", "0:1:4"}) == cli::kSuccess);
    s = read_json(d / "summary.json");
    CHECK(s.at("paths") == 40);
    CHECK(s.at("seed") == 9);
    CHECK(s.at("grid").size() == 4);

    const cli::RunConfig def = cli::defaults_for("simulate");
    CHECK(def.mode == "figure");
    CHECK(def.seed == 20240601);

    cli::RunConfig c = cli::defaults_for("converge");
    CHECK_THROWS(cli::apply_config(c, json{{"nonsense", 1}}));
    CHECK_THROWS(cli::apply_config(c, json{{"paths", "many"}}));
    CHECK(run({"simulate", "--config", (d / "missing.json").string()}) == cli::kUsage);
}

#ifdef GMT_CLI_PATH
TEST_CASE("the installed binary reports exit codes to the shell") {
    const fs::path d = fresh_dir("binary");
    auto shell = [&](const std::string& args) {
        const std::string cmd = std::string(GMT_CLI_PATH) + " " + args + " --out " + d.string() + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    CHECK(shell("psd-check --kernel '" + kExp + "'") == 0);
    CHECK(shell("psd-check --kernel '{\"type\": \"combination\", \"terms\": [{\"weight\": 2, \"kernel\": {\"type\": "
                "\"white_noise\"}}, {\"weight\": -1, \"kernel\": {\"type\": \"constant\"}}]}' --grid 0:2:3") == 1);
    CHECK(shell("psd-check --kernel '{}'") == 2);
    CHECK(shell("counterexample --i-max 4") == 3);
}
#endif
