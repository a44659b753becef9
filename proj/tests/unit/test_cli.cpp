#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "../support/oracles.hpp"
#include "transco/dataio.hpp"
#include "transco/metrics.hpp"

using namespace transco;
namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static const fs::path d = [] {
        fs::path p = fs::temp_directory_path() / ("transco_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return d;
}

int run(const std::string& args) {
    const std::string cmd = std::string("\"") + TRANSCO_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write_text(const std::string& name, const std::string& text) {
    const fs::path p = work_dir() / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

fs::path clean_csv(const std::string& name, Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    Rng rng(seed);
    const Eigen::MatrixXd X = oracle::gaussian(n, p, rng);
    const Eigen::VectorXd Y = X * oracle::gaussian(p, rng) + oracle::gaussian(n, rng);
    std::ostringstream o;
    for (Eigen::Index j = 0; j < p; ++j) o << "x" << j + 1 << ",";
    o << "y\n";
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) o << format_number(X(i, j)) << ",";
        o << format_number(Y[i]) << "\n";
    }
    return write_text(name, o.str());
}

const char* kSmall =
    "example_id = Ex1\nn = 60\np = 20\nK = 5\nN = 200\ns = 15\nrho = 0.1\nseed = 3\ntrials = 4\n";

}  // namespace

TEST_CASE("cli validation exit codes") {
    const fs::path data = clean_csv("clean.csv", 60, 3, 1);
    CHECK(run("fit --data " + data.string() + " --response y --method transco") == 2);
    CHECK(run("fit --data " + data.string() + " --response y --method ptl") == 2);
    CHECK(run("fit --data " + data.string() + " --response nope --method ipod") == 2);
    CHECK(run("fit --data " + data.string() + " --response y --method lasso") == 2);
    CHECK(run("fit --response y --method ipod") == 2);
    CHECK(run("frobnicate") == 2);
    const fs::path bad = write_text("bad.cfg", "example_id = Ex1\nn = 150\np = 100\nK = 5\nN = 1000\ns = 25\nrho = 1.5\n");
    CHECK(run("simulate --config " + bad.string() + " --out " + (work_dir() / "bad").string()) == 2);
    const fs::path typo = write_text("typo.cfg", std::string(kSmall) + "trails = 3\n");
    CHECK(run("simulate --config " + typo.string() + " --out " + (work_dir() / "typo").string()) == 2);
}

TEST_CASE("cli fit on clean data detects nothing") {
    const fs::path data = clean_csv("clean_fit.csv", 80, 3, 2);
    const fs::path out = work_dir() / "clean_report.json";
    REQUIRE(run("fit --data " + data.string() + " --response y --method ipod --out " + out.string()) == 0);
    const auto report = nlohmann::json::parse(slurp(out));
    CHECK(report.at("method") == "ipod");
    CHECK(report.at("beta_hat").size() == 3);
    CHECK(report.at("detected").empty());
    CHECK(report.at("converged") == true);
}

TEST_CASE("cli fit reports a collinear design as a numerical failure") {
    const fs::path data = write_text("collinear.csv", "a,b,y\n1,2,1\n2,4,3\n3,6,2\n4,8,5\n5,10,4\n");
    CHECK(run("fit --data " + data.string() + " --response y --method ols") == 1);
}

TEST_CASE("cli tune writes the penalty path") {
    const fs::path data = clean_csv("tune.csv", 60, 3, 3);
    const fs::path out = work_dir() / "path.csv";
    REQUIRE(run("tune --data " + data.string() + " --response y --method ipod --grid-size 25 --out " + out.string()) ==
            0);
    const CsvTable t = read_csv(out);
    REQUIRE(t.rows.size() == 26);
    const auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(t.header.begin(), t.header.end(), name) - t.header.begin());
    };
    CHECK(t.rows.front()[col("df")] == "0");
    std::size_t best = t.rows.size();
    std::size_t argmin = t.rows.size();
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        if (t.rows[k][col("best")] == "1") best = k;
        if (t.rows[k][col("eligible")] != "1") continue;
        if (argmin == t.rows.size() || std::stod(t.rows[k][col("bic")]) < std::stod(t.rows[argmin][col("bic")]))
            argmin = k;
    }
    CHECK(best < t.rows.size());
    CHECK(best == argmin);
}

TEST_CASE("cli simulate is reproducible across runs and thread counts") {
    const fs::path cfg = write_text("small.cfg", kSmall);
    const fs::path a = work_dir() / "sim_a";
    const fs::path b = work_dir() / "sim_b";
    const fs::path c = work_dir() / "sim_c";
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + a.string() + " --parallel 1") == 0);
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + b.string() + " --parallel 1") == 0);
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + c.string() + " --parallel 3") == 0);
    const std::string ra = slurp(a / "records.csv");
    CHECK_FALSE(ra.empty());
    CHECK(ra == slurp(b / "records.csv"));
    CHECK(ra == slurp(c / "records.csv"));
    CHECK(slurp(a / "records_summary.csv") == slurp(c / "records_summary.csv"));
    CHECK(fs::exists(a / "plot_data.csv"));

    const auto recs = read_results(a / "records.csv", ResultFormat::CSV);
    CHECK(recs.size() == 12);
    const auto summary = summarize(recs);
    CHECK(summary.size() == 3);

    const fs::path j = work_dir() / "sim_json";
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + j.string() + " --format json --trials 2") == 0);
    CHECK(read_results(j / "records.json", ResultFormat::JSON).size() == 6);
}

TEST_CASE("cli transfer detection beats the single-dataset fit on generated files") {
    const fs::path cfg = write_text("gen.cfg", "example_id = Ex1\nn = 150\np = 100\nK = 5\nN = 1000\ns = 25\nrho = 0.1\n");
    double f1_tc = 0.0;
    double f1_ip = 0.0;
    const int seeds = 4;
    for (int s = 0; s < seeds; ++s) {
        const fs::path dir = work_dir() / ("gen_" + std::to_string(s));
        REQUIRE(run("generate --config " + cfg.string() + " --seed " + std::to_string(100 + s) + " --out " +
                    dir.string()) == 0);
        std::string sources;
        for (int k = 1; k <= 5; ++k) sources += " " + (dir / ("source_" + std::to_string(k) + ".csv")).string();
        const std::string common = "fit --data " + (dir / "target.csv").string() + " --response y --truth " +
                                   (dir / "truth.json").string();
        REQUIRE(run(common + " --method transco --sources" + sources + " --out " + (dir / "tc.json").string()) == 0);
        REQUIRE(run(common + " --method ipod --out " + (dir / "ip.json").string()) == 0);
        f1_tc += nlohmann::json::parse(slurp(dir / "tc.json")).at("truth_evaluation").at("f1").get<double>();
        f1_ip += nlohmann::json::parse(slurp(dir / "ip.json")).at("truth_evaluation").at("f1").get<double>();
    }
    CHECK(f1_tc / seeds >= f1_ip / seeds);
}
