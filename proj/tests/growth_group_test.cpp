#include <doctest.h>

#include <cmath>
#include <random>

#include "hdicho/growth_group.hpp"

using namespace hdicho;

namespace {
const auto E = growth::exponential<double>();
const auto Id = growth::identity<double>();
const auto Cube = growth::power<double>(3.0);
const auto Em1 = growth::expm1<double>();
}  // namespace

TEST_SUITE("growth_group") {

TEST_CASE("identity element") {
    CHECK(identity_element(E) == doctest::Approx(0.0));
    CHECK(identity_element(Id) == doctest::Approx(1.0));
    CHECK(identity_element(Cube) == doctest::Approx(1.0));
    CHECK(identity_element(Em1) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("star products") {
    CHECK(star(E, 1.0, 2.0) == doctest::Approx(3.0));
    CHECK(star(Id, 2.0, 3.0) == doctest::Approx(6.0));
    CHECK(star(Cube, 2.0, 3.0) == doctest::Approx(6.0));  // (8 * 27)^(1/3)
    for (const auto* g : {&E, &Id, &Cube, &Em1}) {
        const double e = identity_element(*g);
        for (double t : {0.3, 1.7, 4.0}) CHECK(star(*g, t, e) == doctest::Approx(t).epsilon(1e-12));
    }
}

TEST_CASE("inverse") {
    CHECK(star_inverse(E, 2.0) == doctest::Approx(-2.0));
    CHECK(star_inverse(Id, 4.0) == doctest::Approx(0.25));
    CHECK(star_inverse(Id, 1.0) == doctest::Approx(1.0));
    // expm1: h(t) = e^t - 1, so t^{*-1} = log(1 + 1/(e^t - 1)).
    const double t = 0.8;
    CHECK(star_inverse(Em1, t) == doctest::Approx(std::log1p(1.0 / std::expm1(t))));
}

TEST_CASE("powers") {
    CHECK(star_power(Id, 2.0, 3) == doctest::Approx(8.0));
    CHECK(star_power(E, 1.5, -2) == doctest::Approx(-3.0));
    CHECK(star_power(Id, 7.0, 0) == doctest::Approx(1.0));
    CHECK(star_power(Cube, 5.0, 1) == doctest::Approx(5.0));
    CHECK_THROWS_AS(star_power(E, 400.0, 3), OverflowError);
}

TEST_CASE("absolute value and distance") {
    CHECK(abs_star(Id, 0.5) == doctest::Approx(2.0));
    CHECK(abs_star(Id, 3.0) == doctest::Approx(3.0));
    CHECK(abs_star(Id, 1.0) == doctest::Approx(1.0));
    CHECK(dist(Id, 8.0, 2.0) == doctest::Approx(4.0));
    CHECK(dist(Id, 2.0, 8.0) == doctest::Approx(4.0));
    CHECK(dist(E, 1.3, 1.3) == doctest::Approx(0.0));
}

TEST_CASE("balls") {
    CHECK(in_ball(Id, 2.0, 8.0, 4.0));
    CHECK_FALSE(in_ball(Id, 2.0, 8.0, 3.0));
    CHECK(in_ball(E, 0.4, 0.4, 0.01));
    CHECK_THROWS_AS(in_ball(Id, 2.0, 3.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(in_ball(Id, 2.0, 3.0, 0.5), ArgumentError);
}

TEST_CASE("partitions") {
    const auto p = partition(Id, PartitionSpec<double>{1.0, 2.0, 0, 2});
    REQUIRE(p.size() == 4);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(2.0));
    CHECK(p[2] == doctest::Approx(4.0));
    CHECK(p[3] == doctest::Approx(8.0));

    const auto q = partition(E, PartitionSpec<double>{0.0, 1.0, 0, 1});
    REQUIRE(q.size() == 3);
    CHECK(q[2] == doctest::Approx(2.0));

    for (const auto* g : {&E, &Id, &Cube, &Em1}) {
        const double T = from_log_h(*g, 0.7);
        const auto pts = partition(*g, PartitionSpec<double>{from_log_h(*g, -1.0), T, -3, 3});
        for (std::size_t k = 1; k < pts.size(); ++k)
            CHECK(dist(*g, pts[k], pts[k - 1]) == doctest::Approx(T).epsilon(1e-10));
    }
    CHECK_THROWS_AS(partition(E, PartitionSpec<double>{0.0, 300.0, 0, 5}), DomainError);
    CHECK_THROWS_AS(partition(Id, PartitionSpec<double>{1.0, 0.5, 0, 2}), ArgumentError);
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(star(Id, -1.0, 2.0), DomainError);
    CHECK_THROWS_AS(star_inverse(Cube, 0.0), DomainError);
    CHECK_THROWS_AS(abs_star(Em1, -0.5), DomainError);
    CHECK_THROWS_AS(dist(Id, 1.0, std::nan("")), DomainError);
}

TEST_CASE("group laws on random samples") {
    for (const auto* g : {&E, &Id, &Cube, &Em1}) {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> y(-5.0, 5.0);
        for (int i = 0; i < 200; ++i) {
            const double t = from_log_h(*g, y(rng)), s = from_log_h(*g, y(rng)), r = from_log_h(*g, y(rng));
            CHECK(g->forward(star(*g, t, s)) == doctest::Approx(g->forward(t) * g->forward(s)).epsilon(1e-10));
            CHECK(star(*g, t, s) == doctest::Approx(star(*g, s, t)).epsilon(1e-12));
            CHECK(g->forward(star(*g, star(*g, t, s), r)) ==
                  doctest::Approx(g->forward(star(*g, t, star(*g, s, r)))).epsilon(1e-10));
            CHECK(abs_star(*g, t) >= identity_element(*g) - 1e-12);
        }
    }
}

TEST_CASE("grids") {
    const auto grid = h_decade_grid(Id, 0.01, 100.0, 10);
    CHECK(grid.size() == 41);
    CHECK(grid.front() == doctest::Approx(0.01));
    CHECK(grid.back() == doctest::Approx(100.0));
    CHECK(grid[20] == 1.0);  // e* is placed exactly
    CHECK_THROWS_AS(log_h_grid(Id, 1.0, 0.0, 5), ArgumentError);
}

}
