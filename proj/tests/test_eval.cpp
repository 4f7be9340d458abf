#include <doctest.h>

#include <random>
#include <sstream>

#include "liftgraph/error.hpp"
#include "liftgraph/eval.hpp"

using namespace liftgraph;
using namespace liftgraph::eval;

namespace {

RunRecord record(std::string method, std::size_t nodes, double seconds, double energy)
{
    RunRecord r;
    r.method = std::move(method);
    r.problem = "p";
    r.nodes = nodes;
    r.seconds = seconds;
    r.energy = energy;
    r.width = 2;
    r.height = 2;
    return r;
}

} // namespace

TEST_CASE("self comparison")
{
    const auto b = record("full", 100, 2.0, 50.0);
    const auto row = compare(b, b);
    CHECK(row.reduction_rate == 1.0);
    CHECK(row.time_saved == 0.0);
    CHECK(row.energy_offset == 0.0);
}

TEST_CASE("comparison arithmetic")
{
    const auto b = record("full", 400, 5.0, -200.0);
    const auto r = record("l0cp", 100, 1.0, -198.0);
    const auto row = compare(b, r);
    CHECK(row.reduction_rate == 0.25);
    CHECK(row.time_saved == doctest::Approx(0.8));
    CHECK(row.energy_offset == doctest::Approx(0.01));

    const auto pos = compare(record("full", 4, 1.0, 100.0), record("grid", 1, 0.5, 101.0));
    CHECK(pos.energy_offset == doctest::Approx(0.01));
}

TEST_CASE("comparison rejects different problems and invalid records")
{
    auto b = record("full", 4, 1.0, 1.0);
    auto r = record("grid", 1, 1.0, 1.0);
    r.problem = "q";
    CHECK_THROWS_AS(compare(b, r), InvalidInput);
    r.problem = "p";
    r.energy = std::nan("");
    CHECK_THROWS_AS(compare(b, r), InvalidInput);
    r.energy = 1.0;
    r.nodes = 0;
    CHECK_THROWS_AS(compare(b, r), InvalidInput);
}

TEST_CASE("psnr")
{
    const Image a(4, 4, 1, 0.0), b(4, 4, 1, 0.5);
    CHECK(psnr(a, a) == 99.0);
    CHECK(psnr(a, b) == doctest::Approx(6.0206).epsilon(1e-4));
    CHECK(psnr(b, a) == psnr(a, b));
    CHECK_THROWS_AS(psnr(a, Image(4, 3, 1, 0.0)), InvalidInput);
}

TEST_CASE("ssim")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(16 * 12 * 3), w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = u(rng);
        w[i] = std::clamp(v[i] + 0.2 * (u(rng) - 0.5), 0.0, 1.0);
    }
    const Image a(16, 12, 3, v), b(16, 12, 3, w);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ssim(a, b) < 1.0);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
}

TEST_CASE("dice")
{
    const std::vector<std::uint32_t> a{0, 0, 1, 1}, b{0, 1, 1, 1}, c{5, 5, 5, 5};
    CHECK(dice(a, a) == 1.0);
    // label 0: 2*1/(2+1), label 1: 2*2/(2+3)
    CHECK(dice(a, b) == doctest::Approx((2.0 / 3.0 + 0.8) / 2.0));
    CHECK(dice(a, b) == dice(b, a));
    CHECK(dice(a, c) == 0.0);
    CHECK_THROWS_AS(dice(a, std::vector<std::uint32_t>{0}), InvalidInput);
}

TEST_CASE("report csv is free of wall-clock columns")
{
    const auto b = record("full", 4, 1.0, 2.0);
    const auto r = record("grid", 1, 0.5, 3.0);
    const std::vector<ReportRow> rows{compare(b, b), compare(b, r)};
    std::ostringstream csv, timing, table;
    write_report_csv(csv, rows);
    write_timing_csv(timing, rows);
    write_report_table(table, rows);
    CHECK(csv.str() == "method,nodes,reduction_rate,memory_bytes,energy,energy_offset\n"
                       "full,4,1,0,2,0\n"
                       "grid,1,0.25,0,3,0.5\n");
    CHECK(timing.str() == "method,seconds,time_saved\nfull,1.000000,0.000000\ngrid,0.500000,0.500000\n");
    CHECK(table.str().find("grid") != std::string::npos);
}

TEST_CASE("memory estimate grows with the graph")
{
    CHECK(estimate_memory(10, 20, 4, 100) < estimate_memory(100, 200, 4, 100));
    CHECK(estimate_memory(10, 20, 4, 100) > 100 * 4 * sizeof(double));
}
