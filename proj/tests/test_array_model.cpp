#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hybridbf/array_model.hpp"

using namespace hybridbf;

namespace {
constexpr double kPi = std::numbers::pi;

double wrap(double r) {
    while (r > kPi) r -= 2.0 * kPi;
    while (r <= -kPi) r += 2.0 * kPi;
    return r;
}
}  // namespace

TEST_CASE("steering vector at broadside has zero phase progression") {
    ArrayGeometry geo(4, 0.5, ElementPattern::Isotropic);
    const auto a = steering_vector(geo, 90.0);
    REQUIRE(a.size() == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(a[k].real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(a[k].imag() == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("steering vector endfire two-element case") {
    ArrayGeometry geo(2, 0.5, ElementPattern::Isotropic);
    const auto a = steering_vector(geo, 0.0);  // cos(0) = 1, phase step = pi
    CHECK(std::abs(a[0] - cplx(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(a[1] - cplx(-1.0, 0.0)) < 1e-12);
}

TEST_CASE("steering phase step matches 2 pi (delta/lambda) cos theta") {
    ArrayGeometry geo(11, 0.8, ElementPattern::Macro65);
    for (double theta : {30.0, 60.0, 85.0, 120.0}) {
        const auto a = steering_vector(geo, theta);
        const double expected = 2.0 * kPi * 0.8 * std::cos(theta * kPi / 180.0);
        for (int k = 1; k < 11; ++k) {
            const double step = wrap(std::arg(a[k]) - std::arg(a[k - 1]));
            CHECK(std::abs(wrap(step - expected)) < 1e-12);
        }
    }
}

TEST_CASE("steering vector rejects out-of-range angles") {
    ArrayGeometry geo(4, 0.5, ElementPattern::Isotropic);
    CHECK_THROWS_AS(steering_vector(geo, 181.0), std::domain_error);
    CHECK_THROWS_AS(steering_vector(geo, -200.0), std::domain_error);
}

TEST_CASE("element gain values") {
    CHECK(element_gain(ElementPattern::Isotropic, 17.0) == 1.0);
    CHECK(element_gain(ElementPattern::Macro65, 90.0) == doctest::Approx(1.0));
    // 12 (32.5/65)^2 = 3 dB by construction.
    CHECK(element_gain(ElementPattern::Macro65, 90.0 + 32.5) ==
          doctest::Approx(std::pow(10.0, -3.0 / 20.0)).epsilon(1e-6));
    CHECK(element_gain(ElementPattern::Small110, 90.0 + 55.0) ==
          doctest::Approx(std::pow(10.0, -3.0 / 20.0)).epsilon(1e-6));
    // Front-to-back floor at 30 dB.
    CHECK(element_gain(ElementPattern::Macro65, 90.0 + 179.0) ==
          doctest::Approx(std::pow(10.0, -30.0 / 20.0)).epsilon(1e-6));
}

TEST_CASE("manifold rows equal steering vectors") {
    ArrayGeometry geo(2, 0.5, ElementPattern::Isotropic);
    AngularGrid grid({45.0, 135.0});
    const auto m = array_manifold(geo, grid);
    REQUIRE(m.rows.rows() == 2);
    for (int i = 0; i < 2; ++i) {
        const auto a = steering_vector(geo, grid[i]);
        for (int k = 0; k < 2; ++k) CHECK(std::abs(m.rows(i, k) - a[k]) < 1e-14);
    }
}

TEST_CASE("manifold rows are constant modulus with norm N g^2") {
    ArrayGeometry geo(11, 0.8, ElementPattern::Macro65);
    const auto grid = AngularGrid::uniform(0.0, 180.0, 0.1);
    REQUIRE(grid.size() == 1801);
    const auto m = array_manifold(geo, grid);
    for (std::size_t i = 0; i < grid.size(); i += 137) {
        const double g = element_gain(ElementPattern::Macro65, grid[i]);
        for (int k = 0; k < 11; ++k)
            CHECK(std::abs(m.rows(static_cast<Eigen::Index>(i), k)) ==
                  doctest::Approx(g).epsilon(1e-12));
        CHECK(m.rows.row(static_cast<Eigen::Index>(i)).squaredNorm() ==
              doctest::Approx(11.0 * g * g).epsilon(1e-12));
    }
    // Row at 90 deg has zero phase.
    const auto idx = grid.nearest_index(90.0);
    for (int k = 0; k < 11; ++k)
        CHECK(std::abs(std::arg(m.rows(static_cast<Eigen::Index>(idx), k))) < 1e-12);
}

TEST_CASE("conjugate symmetry about broadside for isotropic elements") {
    ArrayGeometry geo(5, 0.7, ElementPattern::Isotropic);
    for (double theta : {10.0, 35.0, 80.0}) {
        const auto a = steering_vector(geo, theta);
        const auto b = steering_vector(geo, 180.0 - theta);  // cos flips sign
        for (int k = 0; k < 5; ++k) CHECK(std::abs(a[k] - std::conj(b[k])) < 1e-12);
    }
}

TEST_CASE("mask ceiling values and partition") {
    const auto grid = AngularGrid::uniform(0.0, 180.0, 0.1);
    const auto mask = build_mask(85.0, 2.5, 20.0, 7.0, grid);
    CHECK(mask.sll_ceiling_linear == doctest::Approx(0.01).epsilon(1e-12));

    const auto mask15 = build_mask(90.0, 2.5, 15.0, 7.0, grid);
    CHECK(mask15.sll_ceiling_linear == doctest::Approx(std::pow(10.0, -1.5)).epsilon(1e-12));

    // Every grid index lands in exactly one region.
    std::vector<int> hits(grid.size(), 0);
    for (auto i : mask.mainlobe_region) hits[i]++;
    for (auto i : mask.dontcare_region) hits[i]++;
    for (auto i : mask.sll_region) hits[i]++;
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(hits[i] == 1);

    CHECK(mask.halfpower_angles_deg[0] == doctest::Approx(82.5));
    CHECK(mask.halfpower_angles_deg[1] == doctest::Approx(87.5));
}

TEST_CASE("mask with grid covering only the mainlobe keeps an empty sidelobe region") {
    AngularGrid grid({89.0, 90.0, 91.0});
    const auto mask = build_mask(90.0, 1.5, 20.0, 2.0, grid);
    CHECK(mask.sll_region.empty());
    CHECK(mask.mainlobe_region.size() == 3);
}

TEST_CASE("mask errors when the mainlobe window leaves the grid") {
    const auto grid = AngularGrid::uniform(80.0, 100.0, 0.5);
    CHECK_THROWS_AS(build_mask(99.5, 2.5, 20.0, 7.0, grid), std::domain_error);
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(AngularGrid({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(AngularGrid({1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(AngularGrid({2.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(AngularGrid({-190.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ArrayGeometry(1, 0.5, ElementPattern::Isotropic), std::invalid_argument);
    CHECK_THROWS_AS(ArrayGeometry(4, 0.0, ElementPattern::Isotropic), std::invalid_argument);
}

TEST_CASE("tilt mapping round trip") {
    CHECK(tilt_to_internal_deg(8.0) == doctest::Approx(82.0));
    CHECK(internal_to_tilt_deg(82.0) == doctest::Approx(8.0));
    CHECK(internal_to_tilt_deg(tilt_to_internal_deg(-13.8)) == doctest::Approx(-13.8));
}
