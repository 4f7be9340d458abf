#include <doctest.h>

#include <random>

#include "liftgraph/core.hpp"
#include "liftgraph/error.hpp"
#include "oracles.hpp"

using namespace liftgraph;

namespace {

PotentialField random_field(std::size_t w, std::size_t h, std::size_t labels, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-2.0, 3.0);
    std::vector<double> c(w * h * labels);
    for (double& v : c) v = u(rng);
    return PotentialField(w, h, labels, std::move(c));
}

std::vector<double> random_simplex(std::size_t count, std::size_t labels, std::mt19937_64& rng)
{
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> c(count * labels);
    for (std::size_t i = 0; i < count; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < labels; ++k) s += c[i * labels + k] = ex(rng);
        for (std::size_t k = 0; k < labels; ++k) c[i * labels + k] /= s;
    }
    return c;
}

} // namespace

TEST_CASE("image and potential field validation")
{
    CHECK_THROWS_AS(Image(2, 2, 2, 0.0), InvalidInput);
    CHECK_THROWS_AS(Image(2, 1, 1, std::vector<double>{0.0, 1.5}), InvalidInput);
    CHECK_THROWS_AS(Image(2, 1, 1, std::vector<double>{0.0}), InvalidInput);
    CHECK_THROWS_AS(PotentialField(1, 1, 2, {0.0, std::nan("")}), InvalidInput);
    CHECK_THROWS_AS(PotentialField(1, 1, 0, {}), InvalidInput);

    const Image rgb(1, 1, 3, std::vector<double>{1.0, 0.0, 0.0});
    CHECK(to_gray(rgb).at(0, 0) == doctest::Approx(0.299));
}

TEST_CASE("partition splits disconnected ids")
{
    // 0 1 0  -> the right 0 becomes id 2
    const Partition p(3, 1, {0, 1, 0});
    CHECK(p.segment_count() == 3);
    CHECK(p.label(0) == 0);
    CHECK(p.label(1) == 1);
    CHECK(p.label(2) == 2);
    CHECK_THROWS_AS(Partition(2, 1, {0, 2}), InvalidInput);
    CHECK_THROWS_AS(Partition(2, 1, {0}), InvalidInput);

    const auto pp = Partition::per_pixel(3, 2);
    CHECK(pp.segment_count() == 6);
    CHECK(pp.refines(Partition(3, 2, {0, 0, 0, 0, 0, 0})));
    CHECK_FALSE(Partition(3, 2, {0, 0, 0, 0, 0, 0}).refines(pp));
}

TEST_CASE("label_components matches BFS oracle")
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::uint32_t> v(0, 2);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t w = 1 + trial % 7, h = 1 + (trial * 3) % 5;
        std::vector<std::uint32_t> values(w * h);
        for (auto& x : values) x = v(rng);
        std::vector<std::uint32_t> comps;
        const auto count = label_components(w, h, values, comps);
        const auto expected = oracle::components(w, h, values);
        CHECK(comps == expected);
        CHECK(count == *std::max_element(expected.begin(), expected.end()) + 1);
    }
}

TEST_CASE("reduced graph validation")
{
    CHECK_THROWS_AS(ReducedGraph(1, {1.0, 1.0}, {0.0, 0.0}, {{1, 0, 1.0}}), InvalidInput);
    CHECK_THROWS_AS(ReducedGraph(1, {1.0, 1.0}, {0.0, 0.0}, {{0, 1, 0.0}}), InvalidInput);
    CHECK_THROWS_AS(ReducedGraph(1, {1.0, 1.0}, {0.0, 0.0}, {{0, 1, 1.0}, {0, 1, 2.0}}),
                    InvalidInput);
    CHECK_THROWS_AS(ReducedGraph(1, {0.0}, {0.0}, {}), InvalidInput);
    CHECK_NOTHROW(ReducedGraph(1, {1.0, 1.0}, {0.0, 0.0}, {{0, 1, 1.0}}));
}

TEST_CASE("reduce of a 2x2 two-segment partition")
{
    // left column = segment 0, right column = segment 1
    const Partition p(2, 2, {0, 1, 0, 1});
    const PotentialField f(2, 2, 2, {1, 2, 3, 4, 5, 6, 7, 8});
    const auto g = reduce(p, f);
    REQUIRE(g.node_count() == 2);
    CHECK(g.node_area()[0] == 2.0);
    CHECK(g.potentials(0)[0] == 6.0);
    CHECK(g.potentials(0)[1] == 8.0);
    CHECK(g.potentials(1)[0] == 10.0);
    CHECK(g.potentials(1)[1] == 12.0);
    REQUIRE(g.edge_count() == 1);
    CHECK(g.edges()[0] == Edge{0, 1, 2.0});
}

TEST_CASE("reduce with the per-pixel partition equals the grid graph")
{
    std::mt19937_64 rng(5);
    const auto f = random_field(4, 3, 3, rng);
    CHECK(reduce(Partition::per_pixel(4, 3), f) == build_grid_graph(f));
    const auto g = build_grid_graph(f);
    CHECK(g.edge_count() == 3 * 3 + 4 * 2);
}

TEST_CASE("reduction is exact for lifted assignments")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t w = 2 + trial % 6, h = 2 + trial % 5, labels = 1 + trial % 4;
        const auto f = random_field(w, h, labels, rng);
        const std::size_t segments = 1 + rng() % (w * h);
        const Partition p(w, h, oracle::random_partition(w, h, segments, rng));
        const auto g = reduce(p, f);
        const Assignment c(p.segment_count(), labels, random_simplex(p.segment_count(), labels, rng));
        const double lambda = 0.25 * static_cast<double>(trial % 5);
        const auto lifted = lift(p, c);
        const std::vector<double> rho(f.costs().begin(), f.costs().end());
        const std::vector<double> lc(lifted.values().begin(), lifted.values().end());
        CHECK(energy(g, c, lambda) ==
              doctest::Approx(oracle::grid_energy(w, h, labels, rho, lc, lambda)).epsilon(1e-12));
    }
}

TEST_CASE("reassemble copies node values to pixels")
{
    const Partition p(3, 1, {0, 0, 1});
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(reassemble(p, v, 2) == std::vector<double>{1, 2, 1, 2, 3, 4});
    CHECK_THROWS_AS(reassemble(p, v, 1), InvalidInput);
}

TEST_CASE("assignment simplex check and labeling energy")
{
    CHECK_THROWS_AS(Assignment(1, 2, {0.6, 0.6}), InvalidInput);
    CHECK_THROWS_AS(Assignment(1, 2, {1.2, -0.2}), InvalidInput);
    const auto u = Assignment::uniform(2, 4);
    CHECK(u.node(1)[3] == 0.25);

    const ReducedGraph g(2, {1.0, 1.0}, {0.0, 1.0, 1.0, 0.0}, {{0, 1, 3.0}});
    const std::vector<std::uint32_t> split{0, 1}, same{0, 0};
    CHECK(labeling_energy(g, split, 2.0) == 6.0);
    CHECK(labeling_energy(g, same, 2.0) == 1.0);
    CHECK(energy(g, Assignment::one_hot(split, 2), 2.0) == 6.0);
}
