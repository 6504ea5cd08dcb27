#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "freeprob/measure.hpp"

using Catch::Approx;
using namespace freeprob;

namespace {

DiscreteMeasure bern() { return make_measure({-1.0, 1.0}, {0.5, 0.5}); }

DiscreteMeasure random_measure(std::mt19937& rng, int max_atoms = 6) {
    std::uniform_int_distribution<int> natoms(1, max_atoms);
    std::uniform_real_distribution<double> pos(-3.0, 3.0), mass(0.1, 1.0);
    int n = natoms(rng);
    std::vector<double> a, w;
    for (int i = 0; i < n; ++i) {
        a.push_back(pos(rng));
        w.push_back(mass(rng));
    }
    return make_measure(a, w);
}

}  // namespace

TEST_CASE("construction sorts, merges, and normalizes", "[measures]") {
    SECTION("two-point symmetric measure") {
        auto m = bern();
        REQUIRE(m.size() == 2);
        REQUIRE(m.atoms()[0] == -1.0);
        REQUIRE(m.atoms()[1] == 1.0);
        REQUIRE(m.weights()[0] == Approx(0.5));
    }
    SECTION("coincident atoms merge by summing weights") {
        auto m = make_measure({1.0, 1.0}, {0.3, 0.7});
        REQUIRE(m.size() == 1);
        REQUIRE(m.atoms()[0] == 1.0);
        REQUIRE(m.weights()[0] == Approx(1.0));
    }
    SECTION("weights rescale to total mass 1") {
        auto m = make_measure({0.0, 1.0}, {2.0, 6.0});
        REQUIRE(m.weights()[0] == Approx(0.25));
        REQUIRE(m.weights()[1] == Approx(0.75));
    }
    SECTION("unsorted input is sorted") {
        auto m = make_measure({2.0, -1.0, 0.5}, {1.0, 1.0, 1.0});
        REQUIRE(m.atoms() == std::vector<double>{-1.0, 0.5, 2.0});
    }
    SECTION("invalid input rejected") {
        REQUIRE_THROWS_AS(make_measure({}, {}), domain_error);
        REQUIRE_THROWS_AS(make_measure({0.0}, {0.0}), domain_error);
        REQUIRE_THROWS_AS(make_measure({0.0}, {-1.0}), domain_error);
        REQUIRE_THROWS_AS(make_measure({1.0 / 0.0}, {1.0}), domain_error);
        REQUIRE_THROWS_AS(make_measure({0.0, 1.0}, {1.0}), domain_error);
    }
}

TEST_CASE("quantile is the left-continuous inverse CDF", "[measures]") {
    auto m = bern();
    REQUIRE(m.quantile(0.25) == -1.0);
    REQUIRE(m.quantile(0.5) == -1.0);
    REQUIRE(m.quantile(0.500000001) == 1.0);
    REQUIRE(m.quantile(1.0) == 1.0);
    REQUIRE(point_mass(3.0).quantile(0.1) == 3.0);
    REQUIRE(point_mass(3.0).quantile(1.0) == 3.0);
    REQUIRE_THROWS_AS(m.quantile(0.0), domain_error);
    REQUIRE_THROWS_AS(m.quantile(1.5), domain_error);
}

TEST_CASE("quantile round trip: CDF(quantile(t)) >= t", "[measures]") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        auto m = random_measure(rng);
        double c = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            c += m.weights()[i];
            double t = std::min(c, 1.0);
            REQUIRE(m.cdf(m.quantile(t)) >= t - 1e-12);
        }
    }
}

TEST_CASE("quantile of a uniform sample matches the law", "[measures]") {
    auto m = make_measure({-2.0, 0.0, 1.0}, {0.2, 0.5, 0.3});
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(std::nextafter(0.0, 1.0), 1.0);
    int n = 200000;
    NeumaierSum s1, s2;
    for (int i = 0; i < n; ++i) {
        double x = m.quantile(unif(rng));
        s1.add(x);
        s2.add(x * x);
    }
    REQUIRE(s1.value() / n == Approx(m.moment(1)).margin(0.01));
    REQUIRE(s2.value() / n == Approx(m.moment(2)).margin(0.02));
}

TEST_CASE("classical convolution", "[measures]") {
    SECTION("two-point plus two-point") {
        auto s = classical_convolve(bern(), bern(), BinaryOp::add);
        REQUIRE(s.atoms() == std::vector<double>{-2.0, 0.0, 2.0});
        REQUIRE(s.weights()[0] == Approx(0.25));
        REQUIRE(s.weights()[1] == Approx(0.5));
        REQUIRE(s.weights()[2] == Approx(0.25));
    }
    SECTION("adding a point mass translates") {
        auto m = make_measure({0.0, 2.0}, {0.4, 0.6});
        auto s = classical_convolve(point_mass(1.5), m, BinaryOp::add);
        REQUIRE(s.atoms()[0] == Approx(1.5));
        REQUIRE(s.atoms()[1] == Approx(3.5));
        REQUIRE(s.weights()[0] == Approx(0.4));
    }
    SECTION("multiplying by delta_1 is the identity") {
        auto m = make_measure({0.5, 2.0, 3.0}, {0.2, 0.3, 0.5});
        auto s = classical_convolve(m, point_mass(1.0), BinaryOp::mul);
        REQUIRE(s.atoms() == m.atoms());
        for (std::size_t i = 0; i < m.size(); ++i)
            REQUIRE(s.weights()[i] == Approx(m.weights()[i]));
    }
    SECTION("mean additivity and multiplicativity") {
        std::mt19937 rng(23);
        for (int trial = 0; trial < 25; ++trial) {
            auto m = random_measure(rng);
            auto n = random_measure(rng);
            auto sum = classical_convolve(m, n, BinaryOp::add);
            auto prod = classical_convolve(m, n, BinaryOp::mul);
            REQUIRE(sum.mean() == Approx(m.mean() + n.mean()).margin(1e-12));
            REQUIRE(prod.mean() == Approx(m.mean() * n.mean()).margin(1e-12));
        }
    }
}

TEST_CASE("log potential", "[measures]") {
    REQUIRE(log_potential(point_mass(0.0), std::exp(1.0)) == Approx(1.0));
    REQUIRE(log_potential(bern(), 3.0) == Approx(1.5 * std::log(2.0)));
    REQUIRE_THROWS_AS(log_potential(bern(), 1.0), domain_error);
    REQUIRE_THROWS_AS(log_potential(bern(), 0.0), domain_error);

    SECTION("strictly increasing in z above the support") {
        std::mt19937 rng(31);
        for (int trial = 0; trial < 20; ++trial) {
            auto m = random_measure(rng);
            double z0 = m.support_max() + 0.1;
            double prev = log_potential(m, z0);
            for (double dz = 0.3; dz < 3.0; dz += 0.3) {
                double cur = log_potential(m, z0 + dz);
                REQUIRE(cur > prev);
                prev = cur;
            }
        }
    }
}

TEST_CASE("signed log potential", "[measures]") {
    auto ber2 = classical_convolve(bern(), bern(), BinaryOp::add);
    REQUIRE(signed_log_potential(ber2, 1.0) == Approx(0.25 * std::log(3.0)).epsilon(1e-14));
    REQUIRE(signed_log_potential(bern(), 0.0) == Approx(0.0).margin(1e-15));
    REQUIRE(signed_log_potential(point_mass(2.0), 5.0) == Approx(std::log(3.0)));
    REQUIRE_THROWS_AS(signed_log_potential(bern(), 1.0), domain_error);
}

TEST_CASE("scale pushforward", "[measures]") {
    auto m = make_measure({-1.0, 2.0}, {0.25, 0.75});
    auto same = scale_pushforward(m, 1.0);
    REQUIRE(same.atoms() == m.atoms());

    auto half = scale_pushforward(bern(), 0.5);
    REQUIRE(half.atoms() == std::vector<double>{-0.5, 0.5});

    auto neg = scale_pushforward(bern(), -1.0);
    REQUIRE(neg.atoms() == bern().atoms());
    REQUIRE(neg.weights()[0] == Approx(0.5));

    auto flipped = scale_pushforward(m, -1.0);
    REQUIRE(flipped.atoms() == std::vector<double>{-2.0, 1.0});
    REQUIRE(flipped.weights()[0] == Approx(0.75));

    REQUIRE_THROWS_AS(scale_pushforward(m, 0.0), domain_error);
}

TEST_CASE("moments and Wasserstein-1", "[measures]") {
    REQUIRE(bern().moment(2) == Approx(1.0));
    REQUIRE(bern().moment(0) == Approx(1.0));
    REQUIRE(bern().moment(3) == Approx(0.0).margin(1e-15));
    REQUIRE(wasserstein1(bern(), bern()) == Approx(0.0).margin(1e-15));
    REQUIRE(wasserstein1(point_mass(0.0), point_mass(3.0)) == Approx(3.0));

    SECTION("hand-checked two-point vs point mass") {
        // Quantiles differ by 1 on (0,1/2] and by 1 on (1/2,1].
        REQUIRE(wasserstein1(bern(), point_mass(0.0)) == Approx(1.0));
    }

    SECTION("triangle inequality and scaling on random instances") {
        std::mt19937 rng(47);
        for (int trial = 0; trial < 25; ++trial) {
            auto a = random_measure(rng);
            auto b = random_measure(rng);
            auto c = random_measure(rng);
            double ab = wasserstein1(a, b), bc = wasserstein1(b, c), ac = wasserstein1(a, c);
            REQUIRE(ac <= ab + bc + 1e-12);
            double lam = -1.7;
            REQUIRE(wasserstein1(scale_pushforward(a, lam), scale_pushforward(b, lam)) ==
                    Approx(std::abs(lam) * ab).margin(1e-12));
        }
    }
}
