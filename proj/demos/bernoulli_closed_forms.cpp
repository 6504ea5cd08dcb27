// Walkthrough: the symmetric Bernoulli self-convolution, where everything
// is available in closed form. Solves the same problem four ways and prints
// the agreement table:
//   closed form   log(z + sqrt(z^2-4)) - log 2, G = 1/sqrt(z^2-4)
//   Sinkhorn      entropic coupling of the two marginals at cost log(z-x-y)
//   subordination omega-equation solve
//   finite free   degree-N polynomial convolution, value at z

#include <cmath>
#include <cstdio>

#include "freeprob/entropic_ot.hpp"
#include "freeprob/finite_free.hpp"
#include "freeprob/subordination.hpp"

using namespace freeprob;

int main() {
    auto bern = DiscreteMeasure({-1.0, 1.0}, {0.5, 0.5});

    std::printf("%6s %14s %14s %14s %14s\n", "z", "closed form", "Sinkhorn",
                "subordination", "finite N=64");
    for (double z : {2.5, 3.0, 5.0}) {
        double closed = std::log(z + std::sqrt(z * z - 4.0)) - std::log(2.0);

        auto cost = CostSpec::additive(z);
        auto coupling = sinkhorn(build_kernel(cost, bern, bern), bern, bern);
        double ot = ot_value(coupling, cost, bern, bern);

        auto sub = solve_additive(bern, bern, z);
        double free_value = free_log_potential(sub, bern, bern);

        auto rows = asymptotic_logdet_check(bern, bern, ConvolutionKind::additive, z, {64});
        double finite = rows[0].value;

        std::printf("%6.2f %14.10f %14.10f %14.10f %14.10f\n", z, closed, ot, free_value,
                    finite);
    }

    auto cost3 = CostSpec::additive(3.0);
    auto coupling3 = sinkhorn(build_kernel(cost3, bern, bern), bern, bern);
    std::printf("\nCauchy transform at z = 3: coupling %.12f, subordination %.12f, "
                "closed form %.12f\n",
                coupling_cauchy(coupling3, cost3, bern, bern),
                free_cauchy(solve_additive(bern, bern, 3.0)), 1.0 / std::sqrt(5.0));
    return 0;
}
