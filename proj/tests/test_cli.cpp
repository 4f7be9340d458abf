#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "liftgraph/io.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& dir()
{
    static const fs::path d = [] {
        const fs::path p = fs::temp_directory_path() / "liftgraph_test_cli";
        fs::remove_all(p);
        fs::create_directories(p);
        liftgraph::io::write_image(p / "in.png", synthetic::natural_like(24, 24, 4));
        return p;
    }();
    return d;
}

int run(const std::string& args)
{
    const std::string cmd = std::string(LIFTGRAPH_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string in() { return (dir() / "in.png").string(); }

} // namespace

TEST_CASE("pipeline subcommand succeeds")
{
    CHECK(run("pipeline --input " + in() + " --labels 4 --method grid --factor 2 --out " +
              (dir() / "p").string()) == 0);
    CHECK(fs::exists(dir() / "p" / "report.csv"));
}

TEST_CASE("distinct exit codes per error class")
{
    CHECK(run("") == 2);
    CHECK(run("pipeline --bogus") == 2);
    CHECK(run("pipeline --input " + in() + " --lambda -1 --out " + (dir() / "x").string()) == 2);
    CHECK(run("pipeline --input " + (dir() / "missing.png").string() + " --out " +
              (dir() / "x").string()) == 3);
    CHECK(run("solve --graph " + (dir() / "missing.lgr").string() + " --out " + (dir() / "x").string()) == 3);
}

TEST_CASE("config file with flag override")
{
    const fs::path cfg = dir() / "run.cfg";
    {
        std::ofstream f(cfg);
        f << "input = \"" << in() << "\"\nlabels = 3\nmethod = \"grid\"\nfactor = 3\nlambda = 0.2\n";
    }
    CHECK(run("pipeline --config " + cfg.string() + " --factor 2 --out " + (dir() / "c").string()) == 0);
    std::ifstream report(dir() / "c" / "report.csv");
    std::string header, base, row;
    std::getline(report, header);
    std::getline(report, base);
    std::getline(report, row);
    CHECK(row.rfind("grid,144,", 0) == 0); // 24/2 squared
}

TEST_CASE("superpixel, solve and compare stages compose")
{
    const auto sp = dir() / "sp", full = dir() / "full", red = dir() / "red", cmp = dir() / "cmp";
    REQUIRE(run("superpixel --input " + in() + " --labels 4 --method slic --k 30 --out " + sp.string()) == 0);
    REQUIRE(run("superpixel --input " + in() + " --labels 4 --method full --out " + full.string()) == 0);
    REQUIRE(run("solve --graph " + (full / "graph.lgr").string() + " --partition " +
                (full / "partition.pgm").string() + " --unary " + (full / "unary.lpot").string() +
                " --method full --lambda 0.2 --out " + full.string()) == 0);
    REQUIRE(run("solve --graph " + (sp / "graph.lgr").string() + " --partition " +
                (sp / "partition.pgm").string() + " --unary " + (sp / "unary.lpot").string() +
                " --method slic --lambda 0.2 --out " + red.string()) == 0);
    CHECK(run("compare --baseline " + (full / "run.json").string() + " --run " +
              (red / "run.json").string() + " --out " + cmp.string()) == 0);
    CHECK(fs::exists(cmp / "report.csv"));
    // Different lambda is a different problem.
    REQUIRE(run("solve --graph " + (sp / "graph.lgr").string() + " --partition " +
                (sp / "partition.pgm").string() + " --unary " + (sp / "unary.lpot").string() +
                " --method slic --lambda 0.3 --out " + (dir() / "red3").string()) == 0);
    CHECK(run("compare --baseline " + (full / "run.json").string() + " --run " +
              (dir() / "red3" / "run.json").string()) == 2);
}
