#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "freeprob/measure.hpp"
#include "freeprob/subordination.hpp"
#include "freeprob/transforms.hpp"

using Catch::Approx;
using namespace freeprob;

namespace {

DiscreteMeasure bern() { return make_measure({-1.0, 1.0}, {0.5, 0.5}); }

DiscreteMeasure random_measure(std::mt19937& rng, int min_atoms = 2, int max_atoms = 6,
                               double lo = -3.0, double hi = 3.0) {
    std::uniform_int_distribution<int> natoms(min_atoms, max_atoms);
    std::uniform_real_distribution<double> pos(lo, hi), mass(0.1, 1.0);
    int n = natoms(rng);
    std::vector<double> a, w;
    for (int i = 0; i < n; ++i) {
        a.push_back(pos(rng));
        w.push_back(mass(rng));
    }
    return DiscreteMeasure(a, w);
}

}  // namespace

TEST_CASE("additive subordination on the symmetric two-point measure", "[subordination]") {
    auto sol = solve_additive(bern(), bern(), 3.0);
    REQUIRE(sol.omega == Approx(std::sqrt(5.0)).epsilon(1e-11));
    REQUIRE(sol.omega_mu == Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-11));
    REQUIRE(sol.omega_nu == Approx(sol.omega_mu).epsilon(1e-12));
    REQUIRE(free_cauchy(sol) == Approx(1.0 / std::sqrt(5.0)).epsilon(1e-11));
    REQUIRE(free_log_potential(sol, bern(), bern()) ==
            Approx(std::log(3.0 + std::sqrt(5.0)) - std::log(2.0)).epsilon(1e-11));

    SECTION("whole grid matches 1/sqrt(z^2-4)") {
        for (double z : {2.5, 3.0, 4.0, 5.0}) {
            auto s = solve_additive(bern(), bern(), z);
            REQUIRE(free_cauchy(s) == Approx(1.0 / std::sqrt(z * z - 4.0)).epsilon(1e-10));
        }
    }
    SECTION("z at or below the support sum is rejected") {
        REQUIRE_THROWS_AS(solve_additive(bern(), bern(), 2.0), domain_error);
        REQUIRE_THROWS_AS(solve_additive(bern(), bern(), 1.0), domain_error);
    }
}

TEST_CASE("additive convolution with a point mass translates", "[subordination]") {
    std::mt19937 rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        auto nu = random_measure(rng);
        double c = 1.5;
        double z = nu.support_max() + c + 0.7;
        auto sol = solve_additive(point_mass(c), nu, z);
        REQUIRE(free_cauchy(sol) == Approx(cauchy_G(nu, z - c)).epsilon(1e-11));
        REQUIRE(free_log_potential(sol, point_mass(c), nu) ==
                Approx(log_potential(nu, z - c)).margin(1e-11));
        REQUIRE(sol.omega_nu == Approx(z - c).epsilon(1e-12));
    }
}

TEST_CASE("additive residual invariants on random instances", "[subordination]") {
    std::mt19937 rng(72);
    for (int trial = 0; trial < 30; ++trial) {
        auto mu = random_measure(rng, 5, 5);
        auto nu = random_measure(rng, 5, 5);
        double z = mu.support_max() + nu.support_max() + 1.0;
        auto sol = solve_additive(mu, nu, z);
        REQUIRE(std::abs(sol.omega_mu + sol.omega_nu - sol.omega - z) < 1e-10);
        REQUIRE(std::abs(cauchy_G(mu, sol.omega_mu) - 1.0 / sol.omega) < 1e-10);
        REQUIRE(std::abs(cauchy_G(nu, sol.omega_nu) - 1.0 / sol.omega) < 1e-10);
        REQUIRE(sol.omega > 0.0);
    }
}

TEST_CASE("R-transform additivity through the solver", "[subordination]") {
    std::mt19937 rng(73);
    for (int trial = 0; trial < 15; ++trial) {
        auto mu = random_measure(rng);
        auto nu = random_measure(rng);
        for (double dz : {0.5, 1.5, 4.0}) {
            double z = mu.support_max() + nu.support_max() + dz;
            auto sol = solve_additive(mu, nu, z);
            double g = 1.0 / sol.omega;
            // G_{mu addconv nu}(z) = g, so its inverse at g is z and
            // R of the convolution at g is z - omega.
            double lhs = z - sol.omega;
            REQUIRE(lhs == Approx(r_transform(mu, g) + r_transform(nu, g)).margin(1e-8));
        }
    }
}

TEST_CASE("mean of the additive convolution is additive", "[subordination]") {
    std::mt19937 rng(74);
    for (int trial = 0; trial < 8; ++trial) {
        auto mu = random_measure(rng);
        auto nu = random_measure(rng);
        double scale = std::max({1.0, std::abs(mu.support_max()) + std::abs(nu.support_max()),
                                 std::abs(mu.support_min()) + std::abs(nu.support_min())});
        // z^2 (G - 1/z) -> mean with O(1/z) bias; two Richardson stages on
        // doublings of z cancel the 1/z and 1/z^2 terms.
        auto extracted = [&](double z) {
            auto s = solve_additive(mu, nu, z);
            return z * z * (free_cauchy(s) - 1.0 / z);
        };
        double z0 = 1e3 * scale;
        double f1 = extracted(z0), f2 = extracted(2.0 * z0), f3 = extracted(4.0 * z0);
        double g1 = 2.0 * f2 - f1, g2 = 2.0 * f3 - f2;
        double mean = (4.0 * g2 - g1) / 3.0;
        REQUIRE(mean == Approx(mu.mean() + nu.mean()).margin(1e-6));
    }
}

TEST_CASE("multiplicative subordination closed forms", "[subordination]") {
    SECTION("delta_1 is the identity element") {
        std::mt19937 rng(75);
        for (int trial = 0; trial < 10; ++trial) {
            auto mu = random_measure(rng, 2, 6, 0.2, 4.0);
            double z = mu.support_max() + 1.3;
            auto sol = solve_multiplicative(mu, point_mass(1.0), z);
            REQUIRE(free_cauchy(sol) == Approx(cauchy_G(mu, z)).epsilon(1e-11));
            REQUIRE(sol.omega_mu == Approx(z).epsilon(1e-12));
            REQUIRE(sol.omega_nu == Approx(sol.omega + 1.0).epsilon(1e-11));
        }
    }
    SECTION("two point masses") {
        auto sol = solve_multiplicative(point_mass(2.0), point_mass(3.0), 10.0);
        REQUIRE(free_cauchy(sol) == Approx(1.0 / (10.0 - 6.0)).epsilon(1e-12));
    }
    SECTION("signed or zero-mean input rejected") {
        REQUIRE_THROWS_AS(solve_multiplicative(bern(), bern(), 5.0), domain_error);
        REQUIRE_THROWS_AS(
            solve_multiplicative(point_mass(0.0), point_mass(1.0), 5.0), domain_error);
    }
    SECTION("z at or below the product bound rejected") {
        auto m = make_measure({1.0, 2.0}, {0.5, 0.5});
        REQUIRE_THROWS_AS(solve_multiplicative(m, m, 4.0), domain_error);
        REQUIRE_THROWS_AS(solve_multiplicative(m, m, 3.0), domain_error);
    }
}

TEST_CASE("multiplicative residual invariants on random instances", "[subordination]") {
    std::mt19937 rng(76);
    for (int trial = 0; trial < 30; ++trial) {
        auto mu = random_measure(rng, 2, 5, 0.2, 3.0);
        auto nu = random_measure(rng, 2, 5, 0.2, 3.0);
        for (double dz : {0.5, 2.0}) {
            double z = mu.support_max() * nu.support_max() + dz;
            auto sol = solve_multiplicative(mu, nu, z);
            REQUIRE(std::abs(sol.omega_mu * sol.omega_nu - z * (sol.omega + 1.0)) <
                    1e-10 * z);
            double level = 1.0 + 1.0 / sol.omega;
            REQUIRE(std::abs(sol.omega_mu * cauchy_G(mu, sol.omega_mu) - level) < 1e-10);
            REQUIRE(std::abs(sol.omega_nu * cauchy_G(nu, sol.omega_nu) - level) < 1e-10);
        }
    }
}

TEST_CASE("S-transform multiplicativity through the solver", "[subordination]") {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 15; ++trial) {
        auto mu = random_measure(rng, 2, 4, 0.2, 3.0);
        auto nu = random_measure(rng, 2, 4, 0.2, 3.0);
        for (double dz : {0.8, 3.0}) {
            double z = mu.support_max() * nu.support_max() + dz;
            auto sol = solve_multiplicative(mu, nu, z);
            // psi of the product measure at 1/z equals u = 1/omega, so its
            // chi at u is 1/z and S_{mu mulconv nu}(u) = (1+u)/(u z).
            double u = 1.0 / sol.omega;
            double s_conv = (1.0 + u) / (u * z);
            REQUIRE(s_conv ==
                    Approx(s_transform(mu, u) * s_transform(nu, u)).margin(1e-8));
        }
    }
}

TEST_CASE("compression subordination", "[subordination]") {
    SECTION("point mass is invariant under compression") {
        for (double tau : {0.25, 0.5, 0.8}) {
            auto sol = solve_compression(point_mass(1.2), tau, 3.0);
            REQUIRE(sol.omega == Approx((3.0 - (1.0 - tau) * 1.2) / tau).epsilon(1e-12));
            REQUIRE(free_cauchy(sol) == Approx(1.0 / (3.0 - 1.2)).epsilon(1e-12));
            REQUIRE(free_log_potential(sol, point_mass(1.2)) ==
                    Approx(std::log(3.0 - 1.2)).epsilon(1e-12));
        }
    }
    SECTION("two-point at tau = 1/2 gives G(z) = 1/sqrt(z^2-1)") {
        for (double z : {1.2, std::sqrt(2.0), 2.0, 3.0}) {
            auto sol = solve_compression(bern(), 0.5, z);
            REQUIRE(free_cauchy(sol) == Approx(1.0 / std::sqrt(z * z - 1.0)).epsilon(1e-10));
        }
    }
    SECTION("residual invariant on random instances") {
        std::mt19937 rng(78);
        for (int trial = 0; trial < 30; ++trial) {
            auto mu = random_measure(rng);
            double z = mu.support_max() + 2.0;
            auto sol = solve_compression(mu, 0.3, z);
            REQUIRE(std::abs((sol.omega - z) / (1.0 - 0.3) * cauchy_G(mu, sol.omega) - 1.0) <
                    1e-10);
            REQUIRE(sol.omega > std::max(z, mu.support_max()));
        }
    }
    SECTION("domain checks") {
        REQUIRE_THROWS_AS(solve_compression(bern(), 0.5, 1.0), domain_error);
        REQUIRE_THROWS_AS(solve_compression(bern(), 0.0, 3.0), domain_error);
        REQUIRE_THROWS_AS(solve_compression(bern(), 1.0, 3.0), domain_error);
    }
}

TEST_CASE("compression matches rescaled self-convolutions", "[subordination]") {
    std::mt19937 rng(79);
    for (int trial = 0; trial < 10; ++trial) {
        auto mu = random_measure(rng);
        double zc = std::max(std::abs(mu.support_max()), std::abs(mu.support_min()));

        // tau = 1/2: compressing is the same law as halving a two-fold
        // self-convolution, so G_comp(z) = 2 G_{mu+mu}(2z).
        for (double dz : {0.4, 1.1}) {
            double z = zc + dz;
            auto comp = solve_compression(mu, 0.5, z);
            auto twofold = solve_additive(mu, mu, 2.0 * z);
            REQUIRE(free_cauchy(comp) == Approx(2.0 * free_cauchy(twofold)).margin(1e-9));
        }
        // tau = 1/3 written through the R-transform of a three-fold
        // self-convolution: G^{-1}(g) = 3 R_mu(g) + 1/g at g = G_comp(z)/3.
        for (double dz : {0.6, 1.7}) {
            double z = zc + dz;
            auto comp = solve_compression(mu, 1.0 / 3.0, z);
            double g = free_cauchy(comp) / 3.0;
            REQUIRE(3.0 * r_transform(mu, g) + 1.0 / g == Approx(3.0 * z).margin(1e-8));
        }
    }
}

TEST_CASE("compression dilates the R-transform argument", "[subordination]") {
    std::mt19937 rng(80);
    for (int trial = 0; trial < 12; ++trial) {
        auto mu = random_measure(rng);
        std::uniform_real_distribution<double> taud(0.2, 0.9);
        double tau = taud(rng);
        for (double dz : {0.5, 1.5, 3.0}) {
            double z = mu.support_max() + dz;
            auto sol = solve_compression(mu, tau, z);
            double s = free_cauchy(sol);
            // G_comp(z) = s means R_comp(s) = z - 1/s.
            REQUIRE(z - 1.0 / s == Approx(r_transform(mu, tau * s)).margin(1e-8));
        }
    }
}

TEST_CASE("grid tabulation and derivative consistency", "[subordination]") {
    SECTION("point-mass pair gives G = 1/z") {
        auto pts = free_convolve_grid(point_mass(0.0), point_mass(0.0),
                                      ConvolutionKind::additive, {1.0, 2.0, 5.0});
        for (auto& p : pts) REQUIRE(p.cauchy == Approx(1.0 / p.z).epsilon(1e-12));
    }
    SECTION("derivative of the log potential is the Cauchy transform") {
        std::mt19937 rng(81);
        auto check_fd = [](const std::vector<GridPoint>& pts, double h) {
            for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
                double fd =
                    (pts[i + 1].log_potential - pts[i - 1].log_potential) / (2.0 * h);
                REQUIRE(fd == Approx(pts[i].cauchy).margin(1e-6));
            }
        };
        for (int trial = 0; trial < 6; ++trial) {
            auto mu = random_measure(rng, 4, 4);
            auto nu = random_measure(rng, 4, 4);
            double h = 1e-3;
            std::vector<double> grid;
            for (int i = 0; i < 9; ++i)
                grid.push_back(mu.support_max() + nu.support_max() + 1.0 + h * i);
            check_fd(free_convolve_grid(mu, nu, ConvolutionKind::additive, grid), h);
        }
        for (double z0 : {2.5, 3.0, 4.0, 5.0}) {
            double h = 1e-4;
            std::vector<double> grid{z0 - h, z0, z0 + h};
            auto pts = free_convolve_grid(bern(), bern(), ConvolutionKind::additive, grid);
            double fd = (pts[2].log_potential - pts[0].log_potential) / (2.0 * h);
            REQUIRE(fd == Approx(1.0 / std::sqrt(z0 * z0 - 4.0)).margin(1e-6));
        }
        for (int trial = 0; trial < 4; ++trial) {
            auto mu = random_measure(rng, 3, 4, 0.2, 2.5);
            auto nu = random_measure(rng, 3, 4, 0.2, 2.5);
            double h = 1e-3;
            std::vector<double> grid;
            for (int i = 0; i < 9; ++i)
                grid.push_back(mu.support_max() * nu.support_max() + 0.8 + h * i);
            check_fd(free_convolve_grid(mu, nu, ConvolutionKind::multiplicative, grid), h);
        }
        for (int trial = 0; trial < 4; ++trial) {
            auto mu = random_measure(rng);
            double h = 1e-3;
            std::vector<double> grid;
            for (int i = 0; i < 9; ++i) grid.push_back(mu.support_max() + 0.7 + h * i);
            auto pts = compression_grid(mu, 0.4, grid);
            check_fd(pts, h);
        }
    }
}
