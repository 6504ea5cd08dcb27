#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "freeprob/entropic_ot.hpp"
#include "freeprob/measure.hpp"
#include "freeprob/subordination.hpp"

using Catch::Approx;
using namespace freeprob;

namespace {

DiscreteMeasure bern() { return make_measure({-1.0, 1.0}, {0.5, 0.5}); }

DiscreteMeasure random_measure(std::mt19937& rng, int min_atoms, int max_atoms, double lo,
                               double hi) {
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

double two_point_qstar(double z) {
    double r = std::sqrt(z * z - 4.0);
    return r / (2.0 * (z + r));
}

}  // namespace

TEST_CASE("kernel construction", "[entropic_ot]") {
    SECTION("additive two-point") {
        auto K = build_kernel(CostSpec::additive(3.0), bern(), bern());
        REQUIRE(K.entries == std::vector<double>{5.0, 3.0, 3.0, 1.0});
    }
    SECTION("multiplicative against a point mass") {
        auto m = make_measure({0.5, 2.0}, {0.5, 0.5});
        auto K = build_kernel(CostSpec::multiplicative(4.0), m, point_mass(1.0));
        REQUIRE(K(0, 0) == Approx(3.5));
        REQUIRE(K(1, 0) == Approx(2.0));
    }
    SECTION("compression indicator cost") {
        auto K = build_kernel(CostSpec::compression(2.0, 0.25), point_mass(0.0),
                              compression_marginal(0.25));
        REQUIRE(K.entries == std::vector<double>{1.0, 2.0});
    }
    SECTION("nonpositive entries rejected") {
        REQUIRE_THROWS_AS(build_kernel(CostSpec::additive(1.5), bern(), bern()),
                          domain_error);
        REQUIRE_THROWS_AS(build_kernel(CostSpec::compression(0.5, 0.3), bern(),
                                       compression_marginal(0.3)),
                          domain_error);
    }
}

TEST_CASE("Sinkhorn on the symmetric two-point problem", "[entropic_ot]") {
    auto K = build_kernel(CostSpec::additive(3.0), bern(), bern());
    auto sol = sinkhorn(K, bern(), bern());
    double q = two_point_qstar(3.0);

    REQUIRE(sol.pi[0] == Approx(q).margin(1e-9));          // (-1,-1)
    REQUIRE(sol.pi[3] == Approx(q).margin(1e-9));          // (+1,+1)
    REQUIRE(sol.pi[1] == Approx(0.5 - q).margin(1e-9));    // (-1,+1)
    REQUIRE(sol.pi[2] == Approx(0.5 - q).margin(1e-9));    // (+1,-1)
    REQUIRE(ot_value(sol, CostSpec::additive(3.0), bern(), bern()) ==
            Approx(std::log(3.0 + std::sqrt(5.0)) - std::log(2.0)).margin(1e-10));
    REQUIRE(coupling_cauchy(sol, CostSpec::additive(3.0), bern(), bern()) ==
            Approx(1.0 / std::sqrt(5.0)).margin(1e-10));

    SECTION("marginals, gauge, and monotone residuals") {
        for (std::size_t i = 0; i < 2; ++i) {
            REQUIRE(sol.pi[2 * i] + sol.pi[2 * i + 1] == Approx(0.5).margin(1e-10));
            REQUIRE(sol.pi[i] + sol.pi[i + 2] == Approx(0.5).margin(1e-10));
        }
        double la = 0.0, lb = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            la += 0.5 * std::log(sol.a_pot[i]);
            lb += 0.5 * std::log(sol.b_pot[i]);
        }
        REQUIRE(la == Approx(lb).margin(1e-12));
        for (std::size_t k = 1; k < sol.residual_history.size(); ++k)
            REQUIRE(sol.residual_history[k] <= sol.residual_history[k - 1] + 1e-15);
    }
}

TEST_CASE("degenerate couplings are products", "[entropic_ot]") {
    SECTION("point-mass marginal") {
        auto nu = make_measure({-0.5, 0.25, 2.0}, {0.3, 0.3, 0.4});
        auto cost = CostSpec::additive(4.0);
        auto sol = sinkhorn(build_kernel(cost, point_mass(1.0), nu), point_mass(1.0), nu);
        for (std::size_t j = 0; j < 3; ++j)
            REQUIRE(sol.pi[j] == Approx(nu.weights()[j]).margin(1e-11));
    }
    SECTION("constant kernel") {
        auto mu = make_measure({-1.0, 1.0}, {0.4, 0.6});
        auto nu = make_measure({-1.0, 1.0}, {0.7, 0.3});
        KernelMatrix K{2, 2, {1.0, 1.0, 1.0, 1.0}};
        auto sol = sinkhorn(K, mu, nu);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                REQUIRE(sol.pi[i * 2 + j] ==
                        Approx(mu.weights()[i] * nu.weights()[j]).margin(1e-11));
    }
}

TEST_CASE("gauge rescaling leaves the coupling and value unchanged", "[entropic_ot]") {
    auto mu = make_measure({-1.0, 0.5, 1.5}, {0.2, 0.5, 0.3});
    auto nu = make_measure({-0.5, 1.0}, {0.6, 0.4});
    auto cost = CostSpec::additive(4.0);
    auto K = build_kernel(cost, mu, nu);
    auto sol = sinkhorn(K, mu, nu);

    double c = 3.7;
    auto value_from = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double v = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) v -= mu.weights()[i] * std::log(a[i]);
        for (std::size_t j = 0; j < nu.size(); ++j) v -= nu.weights()[j] * std::log(b[j]);
        return v;
    };
    auto a2 = sol.a_pot, b2 = sol.b_pot;
    for (auto& x : a2) x *= c;
    for (auto& x : b2) x /= c;
    REQUIRE(value_from(a2, b2) == Approx(value_from(sol.a_pot, sol.b_pot)).margin(1e-12));
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j)
            REQUIRE(mu.weights()[i] * nu.weights()[j] * a2[i] * b2[j] * K(i, j) ==
                    Approx(sol.pi[i * nu.size() + j]).epsilon(1e-12));
}

TEST_CASE("optimal coupling matches the subordination closed form", "[entropic_ot]") {
    std::mt19937 rng(611);
    SECTION("additive") {
        for (int trial = 0; trial < 10; ++trial) {
            auto mu = random_measure(rng, 2, 6, -2.0, 2.0);
            auto nu = random_measure(rng, 2, 6, -2.0, 2.0);
            double z = mu.support_max() + nu.support_max() + 1.0;
            auto cost = CostSpec::additive(z);
            auto sol = sinkhorn(build_kernel(cost, mu, nu), mu, nu);
            auto sub = solve_additive(mu, nu, z);
            for (std::size_t i = 0; i < mu.size(); ++i)
                for (std::size_t j = 0; j < nu.size(); ++j) {
                    double x = mu.atoms()[i], y = nu.atoms()[j];
                    double closed = mu.weights()[i] * nu.weights()[j] * sub.omega *
                                    (z - x - y) /
                                    ((sub.omega_mu - x) * (sub.omega_nu - y));
                    REQUIRE(sol.pi[i * nu.size() + j] ==
                            Approx(closed).epsilon(1e-6));
                }
        }
    }
    SECTION("multiplicative") {
        for (int trial = 0; trial < 10; ++trial) {
            auto mu = random_measure(rng, 2, 5, 0.2, 2.5);
            auto nu = random_measure(rng, 2, 5, 0.2, 2.5);
            double z = mu.support_max() * nu.support_max() + 0.8;
            auto cost = CostSpec::multiplicative(z);
            auto sol = sinkhorn(build_kernel(cost, mu, nu), mu, nu);
            auto sub = solve_multiplicative(mu, nu, z);
            for (std::size_t i = 0; i < mu.size(); ++i)
                for (std::size_t j = 0; j < nu.size(); ++j) {
                    double x = mu.atoms()[i], y = nu.atoms()[j];
                    double closed = mu.weights()[i] * nu.weights()[j] * sub.omega *
                                    (z - x * y) /
                                    ((sub.omega_mu - x) * (sub.omega_nu - y));
                    REQUIRE(sol.pi[i * nu.size() + j] ==
                            Approx(closed).epsilon(1e-6));
                }
        }
    }
    SECTION("compression") {
        for (int trial = 0; trial < 10; ++trial) {
            auto mu = random_measure(rng, 2, 6, -2.0, 2.0);
            double tau = std::uniform_real_distribution<double>(0.15, 0.85)(rng);
            double z = mu.support_max() + 1.2;
            auto nu = compression_marginal(tau);
            auto cost = CostSpec::compression(z, tau);
            auto sol = sinkhorn(build_kernel(cost, mu, nu), mu, nu);
            auto sub = solve_compression(mu, tau, z);
            for (std::size_t i = 0; i < mu.size(); ++i) {
                double x = mu.atoms()[i];
                double on = mu.weights()[i] * (z - x) / (sub.omega - x);
                double off = mu.weights()[i] * (sub.omega - z) / (sub.omega - x);
                REQUIRE(sol.pi[i * 2 + 1] == Approx(on).epsilon(1e-6));
                REQUIRE(sol.pi[i * 2 + 0] == Approx(off).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("transport value equals the subordination log potential", "[entropic_ot]") {
    std::mt19937 rng(612);
    for (int trial = 0; trial < 8; ++trial) {
        auto mu = random_measure(rng, 2, 12, -2.0, 2.0);
        auto nu = random_measure(rng, 2, 12, -2.0, 2.0);
        for (double dz : {0.5, 1.0, 5.0}) {
            double z = mu.support_max() + nu.support_max() + dz;
            auto cost = CostSpec::additive(z);
            auto sol = sinkhorn(build_kernel(cost, mu, nu), mu, nu);
            auto sub = solve_additive(mu, nu, z);
            REQUIRE(ot_value(sol, cost, mu, nu) ==
                    Approx(free_log_potential(sub, mu, nu)).margin(1e-6));
            REQUIRE(coupling_cauchy(sol, cost, mu, nu) ==
                    Approx(free_cauchy(sub)).margin(1e-6));

            // feasibility of the product coupling bounds the value below
            NeumaierSum classical;
            for (std::size_t i = 0; i < mu.size(); ++i)
                for (std::size_t j = 0; j < nu.size(); ++j)
                    classical.add(mu.weights()[i] * nu.weights()[j] *
                                  std::log(z - mu.atoms()[i] - nu.atoms()[j]));
            REQUIRE(ot_value(sol, cost, mu, nu) >= classical.value() - 1e-12);
        }
    }
    SECTION("compression value carries the factor tau") {
        for (int trial = 0; trial < 8; ++trial) {
            auto mu = random_measure(rng, 2, 10, -2.0, 2.0);
            double tau = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
            double z = mu.support_max() + 0.9;
            auto nu = compression_marginal(tau);
            auto cost = CostSpec::compression(z, tau);
            auto sol = sinkhorn(build_kernel(cost, mu, nu), mu, nu);
            auto sub = solve_compression(mu, tau, z);
            REQUIRE(ot_value(sol, cost, mu, nu) ==
                    Approx(tau * free_log_potential(sub, mu)).margin(1e-6));
            REQUIRE(coupling_cauchy(sol, cost, mu, nu) ==
                    Approx(tau * free_cauchy(sub)).margin(1e-6));
        }
    }
    SECTION("point-mass compression value") {
        double tau = 0.4, z = 3.0, c = 1.1;
        auto nu = compression_marginal(tau);
        auto cost = CostSpec::compression(z, tau);
        auto sol = sinkhorn(build_kernel(cost, point_mass(c), nu), point_mass(c), nu);
        REQUIRE(ot_value(sol, cost, point_mass(c), nu) ==
                Approx(tau * std::log(z - c)).margin(1e-10));
        REQUIRE(coupling_cauchy(sol, cost, point_mass(c), nu) ==
                Approx(tau / (z - c)).margin(1e-10));
    }
    SECTION("additive against delta_0 keeps the plain Cauchy transform") {
        auto mu = make_measure({-1.2, 0.3, 0.9}, {0.25, 0.4, 0.35});
        auto cost = CostSpec::additive(2.5);
        auto sol = sinkhorn(build_kernel(cost, mu, point_mass(0.0)), mu, point_mass(0.0));
        REQUIRE(coupling_cauchy(sol, cost, mu, point_mass(0.0)) ==
                Approx(cauchy_G(mu, 2.5)).margin(1e-10));
    }
}

TEST_CASE("multi-marginal scaling", "[entropic_ot]") {
    SECTION("d = 2 runs through the same core as the matrix solver") {
        auto mu = make_measure({-1.0, 0.4}, {0.45, 0.55});
        auto nu = make_measure({-0.7, 1.0, 1.4}, {0.3, 0.3, 0.4});
        auto K = build_kernel(CostSpec::additive(4.0), mu, nu);
        auto flat = sinkhorn(K, mu, nu);
        MultiKernel mk{{2, 3}, K.entries};
        auto tensor = multimarginal_sinkhorn(mk, {mu, nu});
        REQUIRE(tensor.potentials[0] == flat.a_pot);
        REQUIRE(tensor.potentials[1] == flat.b_pot);
        REQUIRE(tensor.value == flat.value);
    }
    SECTION("a point-mass margin shifts z") {
        auto mu = make_measure({-1.0, 1.0}, {0.5, 0.5});
        double c = 0.6, z = 4.2;
        auto k3 = build_multi_kernel(ConvolutionKind::additive, z,
                                     {mu, point_mass(c), mu});
        auto sol3 = multimarginal_sinkhorn(k3, {mu, point_mass(c), mu});
        auto k2 = build_multi_kernel(ConvolutionKind::additive, z - c, {mu, mu});
        auto sol2 = multimarginal_sinkhorn(k2, {mu, mu});
        REQUIRE(sol3.value == Approx(sol2.value).margin(1e-10));
    }
    SECTION("three-fold two-point problem matches the compression oracle") {
        // log potential of the triple self-convolution, written through
        // compression: int log(z - x) d(mu+mu+mu) = log 3
        //   + log potential of the tau = 1/3 compression at z/3
        double z = 4.0;
        auto k3 = build_multi_kernel(ConvolutionKind::additive, z, {bern(), bern(), bern()});
        auto sol3 = multimarginal_sinkhorn(k3, {bern(), bern(), bern()});
        auto comp = solve_compression(bern(), 1.0 / 3.0, z / 3.0);
        double oracle = std::log(3.0) + free_log_potential(comp, bern());
        REQUIRE(sol3.value == Approx(oracle).margin(1e-6));
        // and the Cauchy transform of the triple convolution is known
        double g = free_cauchy(comp) / 3.0;
        REQUIRE(g == Approx((3.0 * std::sqrt(2.0) - 2.0) / 7.0).margin(1e-9));
    }
    SECTION("size caps enforced") {
        auto grid = [](int n) {
            std::vector<double> a;
            for (int i = 0; i < n; ++i) a.push_back(i * 0.01);
            return make_uniform_measure(a);
        };
        REQUIRE_THROWS_AS(
            build_multi_kernel(ConvolutionKind::additive, 100.0,
                               {grid(70), grid(70), grid(70)}),
            domain_error);
        REQUIRE_THROWS_AS(build_multi_kernel(ConvolutionKind::additive, 100.0,
                                             {grid(2), grid(2), grid(2), grid(2), grid(2)}),
                          domain_error);
    }
}

TEST_CASE("Monge pairing bounds", "[entropic_ot]") {
    SECTION("two-point enumeration") {
        auto b = monge_bounds(bern(), bern(), 3.0, 2);
        REQUIRE(b.sup_value == Approx(std::log(3.0)).epsilon(1e-13));
        REQUIRE(b.inf_value == Approx(0.5 * std::log(5.0)).epsilon(1e-13));
    }
    SECTION("point mass forces a unique coupling") {
        auto nu = make_measure({-1.0, 0.0, 2.0}, {0.25, 0.25, 0.5});
        auto b = monge_bounds(point_mass(0.5), nu, 4.0, 512);
        REQUIRE(b.inf_value == Approx(b.sup_value).margin(1e-12));
    }
    SECTION("sandwich around the free value") {
        std::mt19937 rng(613);
        for (int trial = 0; trial < 10; ++trial) {
            // equal-weight atoms on a grid divisible by the atom count keep
            // the quantile discretization exact
            std::uniform_real_distribution<double> pos(-2.0, 2.0);
            std::vector<double> xs(4), ys(4);
            for (auto& v : xs) v = pos(rng);
            for (auto& v : ys) v = pos(rng);
            auto mu = make_uniform_measure(xs);
            auto nu = make_uniform_measure(ys);
            double z = mu.support_max() + nu.support_max() + 0.8;
            auto b = monge_bounds(mu, nu, z, 64);
            auto sub = solve_additive(mu, nu, z);
            double v = free_log_potential(sub, mu, nu);
            REQUIRE(v >= b.inf_value - 1e-10);
            REQUIRE(v <= b.sup_value + 1e-10);
        }
    }

    SECTION("exact pairing values on two-point marginals") {
        auto b = monge_bounds_exact(bern(), bern(), 3.0);
        REQUIRE(b.sup_value == Approx(std::log(3.0)).epsilon(1e-14));
        REQUIRE(b.inf_value == Approx(0.5 * std::log(5.0)).epsilon(1e-14));
    }

    SECTION("exact pairing handles unequal weights without grid error") {
        auto mu = make_measure({-1.0, 0.5, 2.0}, {0.3, 0.5, 0.2});
        auto nu = make_measure({0.0, 1.0}, {0.7, 0.3});
        double z = 5.0;
        auto exact = monge_bounds_exact(mu, nu, z);
        // comonotone pairing by hand: mass splits (0.3,0.4,0.3·1,0.2·1)
        double inf = 0.3 * std::log(z + 1.0) + 0.4 * std::log(z - 0.5) +
                     0.1 * std::log(z - 1.5) + 0.2 * std::log(z - 3.0);
        // antitone: mu ascending against nu descending
        double sup = 0.3 * std::log(z) + 0.5 * std::log(z - 0.5) + 0.2 * std::log(z - 2.0);
        REQUIRE(exact.inf_value == Approx(inf).epsilon(1e-14));
        REQUIRE(exact.sup_value == Approx(sup).epsilon(1e-14));
        auto grid = monge_bounds(mu, nu, z, 4096);
        REQUIRE(grid.inf_value == Approx(exact.inf_value).margin(2e-3));
        REQUIRE(grid.sup_value == Approx(exact.sup_value).margin(2e-3));
        // the free value sits strictly inside the exact sandwich
        auto sub = solve_additive(mu, nu, z);
        double v = free_log_potential(sub, mu, nu);
        REQUIRE(v >= exact.inf_value - 1e-10);
        REQUIRE(v <= exact.sup_value + 1e-10);
    }
}

TEST_CASE("2x2 brute force oracle", "[entropic_ot]") {
    SECTION("closed form on the symmetric problem") {
        auto r = brute_force_2x2(bern(), bern(), CostSpec::additive(3.0));
        REQUIRE(r.q == Approx(two_point_qstar(3.0)).margin(1e-9));
        REQUIRE(r.value ==
                Approx(std::log(3.0 + std::sqrt(5.0)) - std::log(2.0)).margin(1e-10));
    }
    SECTION("agreement with the scaling solver on random instances") {
        std::mt19937 rng(614);
        std::uniform_real_distribution<double> dz(0.2, 3.0);
        for (int trial = 0; trial < 100; ++trial) {
            auto mu = random_measure(rng, 2, 2, -2.0, 2.0);
            auto nu = random_measure(rng, 2, 2, -2.0, 2.0);
            auto cost = CostSpec::additive(mu.support_max() + nu.support_max() + dz(rng));
            auto sol = sinkhorn(build_kernel(cost, mu, nu), mu, nu);
            auto oracle = brute_force_2x2(mu, nu, cost);
            REQUIRE(ot_value(sol, cost, mu, nu) == Approx(oracle.value).margin(1e-8));
            REQUIRE(sol.pi[0] == Approx(oracle.q).margin(1e-7));
        }
        for (int trial = 0; trial < 30; ++trial) {
            auto mu = random_measure(rng, 2, 2, 0.2, 2.0);
            auto nu = random_measure(rng, 2, 2, 0.2, 2.0);
            auto cost =
                CostSpec::multiplicative(mu.support_max() * nu.support_max() + dz(rng));
            auto sol = sinkhorn(build_kernel(cost, mu, nu), mu, nu);
            auto oracle = brute_force_2x2(mu, nu, cost);
            REQUIRE(ot_value(sol, cost, mu, nu) == Approx(oracle.value).margin(1e-8));
        }
        for (int trial = 0; trial < 30; ++trial) {
            auto mu = random_measure(rng, 2, 2, -2.0, 2.0);
            double tau = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
            auto nu = compression_marginal(tau);
            auto cost = CostSpec::compression(mu.support_max() + dz(rng), tau);
            auto sol = sinkhorn(build_kernel(cost, mu, nu), mu, nu);
            auto oracle = brute_force_2x2(mu, nu, cost);
            REQUIRE(ot_value(sol, cost, mu, nu) == Approx(oracle.value).margin(1e-8));
        }
    }
    SECTION("constant kernel maximizer is the product coupling") {
        auto mu = make_measure({-1.0, 1.0}, {0.35, 0.65});
        auto nu = make_measure({-1.0, 1.0}, {0.8, 0.2});
        // constant cost via z shifts: huge z makes K nearly flat, so exercise
        // the objective directly with a synthetic flat kernel instead
        KernelMatrix K{2, 2, {2.0, 2.0, 2.0, 2.0}};
        auto sol = sinkhorn(K, mu, nu);
        REQUIRE(sol.pi[0] == Approx(0.35 * 0.8).margin(1e-10));
    }
}

TEST_CASE("near-bound solves run in the log domain and stay finite", "[entropic_ot]") {
    double z = 2.0 + 5e-4;
    auto cost = CostSpec::additive(z);
    auto sol = sinkhorn(build_kernel(cost, bern(), bern()), bern(), bern());
    double v = ot_value(sol, cost, bern(), bern());
    REQUIRE(std::isfinite(v));
    auto sub = solve_additive(bern(), bern(), z);
    REQUIRE(v == Approx(free_log_potential(sub, bern(), bern())).margin(1e-6));
}
