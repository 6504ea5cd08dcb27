#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "freeprob/common.hpp"
#include "freeprob/measure.hpp"
#include "freeprob/transforms.hpp"

namespace freeprob {

enum class ConvolutionKind { additive, multiplicative, compression };

inline const char* kind_name(ConvolutionKind k) {
    switch (k) {
        case ConvolutionKind::additive: return "additive";
        case ConvolutionKind::multiplicative: return "multiplicative";
        default: return "compression";
    }
}

/// Solution of a subordination system at one evaluation point z.
///
/// additive:        omega_mu + omega_nu = omega + z,
///                  G_mu(omega_mu) = G_nu(omega_nu) = 1/omega
/// multiplicative:  omega_mu * omega_nu = z (omega + 1),
///                  omega_mu G_mu(omega_mu) = omega_nu G_nu(omega_nu) = 1 + 1/omega
/// compression:     (omega - z)/(1 - tau) * G_mu(omega) = 1
///
/// omega_mu/omega_nu are NaN for compression; tau is NaN otherwise.
struct SubordinationSolution {
    ConvolutionKind kind;
    double z;
    double omega;
    double omega_mu;
    double omega_nu;
    double tau;
    double residual;
};

namespace detail {

constexpr double invariant_tol = 1e-10;

// Bracket a root of f on (lo, hi), where f is positive at the low end and
// negative at the high end. Endpoints are pushed out geometrically; if that
// fails, a log-spaced scan over a widened interval looks for any adjacent
// sign change before giving up.
template <class F>
inline std::pair<double, double> bracket_pos_to_neg(F&& f, double lo, double hi,
                                                    const char* what) {
    if (lo > hi) std::swap(lo, hi);
    const double lo0 = lo, hi0 = hi;

    bool lo_ok = false, hi_ok = false;
    for (int k = 0; k <= 200; ++k, lo *= 0.5)
        if (f(lo) >= 0.0) { lo_ok = true; break; }
    if (lo_ok)
        for (int k = 0; k <= 200; ++k, hi *= 2.0)
            if (hi > lo && f(hi) <= 0.0) { hi_ok = true; break; }
    if (lo_ok && hi_ok) return {lo, hi};

    double scan_lo = lo0 * 0x1p-60, scan_hi = hi0 * 0x1p60;
    double prev_x = scan_lo, prev_f = f(prev_x);
    double ratio = std::pow(scan_hi / scan_lo, 1.0 / 1023.0);
    for (int i = 1; i < 1024; ++i) {
        double x = scan_lo * std::pow(ratio, i);
        double fx = f(x);
        if (prev_f > 0.0 && fx <= 0.0) return {prev_x, x};
        prev_x = x;
        prev_f = fx;
    }
    std::ostringstream msg;
    msg << what << ": no sign change found in [" << scan_lo << ", " << scan_hi
        << "] after geometric expansion and 1024-point scan";
    throw convergence_error(msg.str());
}

// Bisection on a pos-to-neg bracket followed by Newton polish.
template <class F, class DF>
inline double bisect_then_newton(F&& f, DF&& df, double lo, double hi, double abs_tol,
                                 const char* what) {
    double x = 0.5 * (lo + hi);
    for (int k = 0; k < 60; ++k) {
        x = 0.5 * (lo + hi);
        if (f(x) > 0.0)
            lo = x;
        else
            hi = x;
    }
    for (int k = 0; k < 12; ++k) {
        double fx = f(x);
        if (std::abs(fx) <= 0.25 * abs_tol) break;
        double d = df(x);
        if (d == 0.0 || !std::isfinite(d)) break;
        double next = x - fx / d;
        if (next <= lo || next >= hi) break;
        x = next;
    }
    if (std::abs(f(x)) > abs_tol) {
        std::ostringstream msg;
        msg << what << ": residual " << f(x) << " above tolerance " << abs_tol;
        throw convergence_error(msg.str());
    }
    return x;
}

// J(s) = s G(s) - 1 is strictly decreasing from +inf to 0 on (E_plus, inf)
// for measures on [0, inf) with positive mean; invert it there.
inline double j_inverse(const DiscreteMeasure& m, double u, double eps = 1e-9) {
    require(u > 0.0, "J inverse needs u > 0");
    double edge = m.support_max();
    double lo = edge + eps;
    for (int k = 0; j_transform(m, lo) < u; ++k) {
        if (k > 600 || edge + (lo - edge) * 0.5 == edge)
            throw convergence_error("J inverse: u exceeds the attainable range");
        lo = edge + (lo - edge) * 0.5;
    }
    double hi = lo + std::max(1.0, edge);
    for (int k = 0; j_transform(m, hi) > u; ++k) {
        if (k > 600) throw convergence_error("J inverse: right bracket failed");
        hi = edge + (hi - edge) * 2.0;
    }
    double s = 0.5 * (lo + hi);
    for (int k = 0; k < 60; ++k) {
        s = 0.5 * (lo + hi);
        if (j_transform(m, s) > u)
            lo = s;
        else
            hi = s;
    }
    for (int k = 0; k < 8; ++k) {
        double fu = j_transform(m, s) - u;
        if (std::abs(fu) < 1e-14 * u) break;
        double d = cauchy_G(m, s) + s * cauchy_G_derivative(m, s);
        double next = s - fu / d;
        if (!(next > edge)) break;
        s = next;
    }
    if (std::abs(j_transform(m, s) - u) > 1e-12 * u)
        throw convergence_error("J inverse: residual above tolerance");
    return s;
}

inline void check(bool ok, const char* what) {
    if (!ok) throw convergence_error(std::string("solution check failed: ") + what);
}

}  // namespace detail

/// Re-assert every invariant of a solution against the source measures.
/// Called on each accepted root, so a spurious root from a bad bracket can
/// never leak out.
inline void verify_solution(const SubordinationSolution& s, const DiscreteMeasure& mu,
                            const DiscreteMeasure* nu = nullptr) {
    using detail::check;
    constexpr double tol = detail::invariant_tol;
    switch (s.kind) {
        case ConvolutionKind::additive: {
            check(nu != nullptr, "additive solution needs both measures");
            check(s.omega > 0.0, "omega > 0");
            check(s.omega_mu > mu.support_max(), "omega_mu above support");
            check(s.omega_nu > nu->support_max(), "omega_nu above support");
            check(std::abs(s.omega_mu + s.omega_nu - s.omega - s.z) < tol, "additive sum");
            check(std::abs(cauchy_G(mu, s.omega_mu) - 1.0 / s.omega) < tol, "G_mu level");
            check(std::abs(cauchy_G(*nu, s.omega_nu) - 1.0 / s.omega) < tol, "G_nu level");
            break;
        }
        case ConvolutionKind::multiplicative: {
            check(nu != nullptr, "multiplicative solution needs both measures");
            check(s.omega_mu > mu.support_max(), "omega_mu above support");
            check(s.omega_nu > nu->support_max(), "omega_nu above support");
            check(std::abs(s.omega_mu * s.omega_nu - s.z * (s.omega + 1.0)) <
                      tol * std::abs(s.z),
                  "multiplicative product");
            double level = 1.0 + 1.0 / s.omega;
            check(std::abs(s.omega_mu * cauchy_G(mu, s.omega_mu) - level) < tol,
                  "J_mu level");
            check(std::abs(s.omega_nu * cauchy_G(*nu, s.omega_nu) - level) < tol,
                  "J_nu level");
            break;
        }
        case ConvolutionKind::compression: {
            check(s.omega > std::max(s.z, mu.support_max()), "omega above max(z, support)");
            check(std::abs((s.omega - s.z) / (1.0 - s.tau) * cauchy_G(mu, s.omega) - 1.0) <
                      tol,
                  "compression level");
            break;
        }
    }
}

/// Subordination triple for the additive free convolution at z, found as a
/// scalar root-find in the level g = 1/omega:
///   G_mu^{-1}(g) + G_nu^{-1}(g) - 1/g - z = 0.
inline SubordinationSolution solve_additive(const DiscreteMeasure& mu,
                                            const DiscreteMeasure& nu, double z) {
    double edge = mu.support_max() + nu.support_max();
    require(z > edge, "additive solve needs z above the sum of support maxima");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    SubordinationSolution sol{ConvolutionKind::additive, z, 0.0, 0.0, 0.0, nan, 0.0};

    if (mu.size() == 1 || nu.size() == 1) {
        // A point mass only translates; the system becomes explicit.
        bool mu_point = mu.size() == 1;
        const DiscreteMeasure& other = mu_point ? nu : mu;
        double c = mu_point ? mu.atoms()[0] : nu.atoms()[0];
        double omega = 1.0 / cauchy_G(other, z - c);
        sol.omega = omega;
        sol.omega_mu = mu_point ? c + omega : z - c;
        sol.omega_nu = mu_point ? z - c : c + omega;
        sol.residual = sol.omega_mu + sol.omega_nu - sol.omega - z;
        verify_solution(sol, mu, &nu);
        return sol;
    }

    auto residual = [&](double g) {
        return cauchy_inverse(mu, g) + cauchy_inverse(nu, g) - 1.0 / g - z;
    };
    auto residual_slope = [&](double g) {
        double wm = cauchy_inverse(mu, g), wn = cauchy_inverse(nu, g);
        return 1.0 / cauchy_G_derivative(mu, wm) + 1.0 / cauchy_G_derivative(nu, wn) +
               1.0 / (g * g);
    };

    // G of the convolution at z lies between the reciprocal distances to
    // the extreme possible atoms of mu plus nu.
    double lo = 1.0 / (z - mu.support_min() - nu.support_min());
    double hi = 1.0 / (z - edge);
    auto [blo, bhi] = detail::bracket_pos_to_neg(residual, lo, hi, "additive solve");
    double tol = 1e-12 * std::max(1.0, std::abs(z));
    double g = detail::bisect_then_newton(residual, residual_slope, blo, bhi, tol,
                                          "additive solve");

    sol.omega = 1.0 / g;
    sol.omega_mu = cauchy_inverse(mu, g);
    sol.omega_nu = cauchy_inverse(nu, g);
    sol.residual = residual(g);
    verify_solution(sol, mu, &nu);
    return sol;
}

/// Subordination triple for the multiplicative free convolution at z, via a
/// scalar root-find in u = 1/omega:
///   J_mu^{-1}(u) * J_nu^{-1}(u) = z (1 + u)/u.
/// Both measures must live on [0, inf) with positive mean; monotonicity of
/// J under that restriction is what makes the inverses well defined.
inline SubordinationSolution solve_multiplicative(const DiscreteMeasure& mu,
                                                  const DiscreteMeasure& nu, double z) {
    require(mu.support_min() >= 0.0 && nu.support_min() >= 0.0,
            "multiplicative solve needs supports in [0, inf)");
    require(mu.mean() > 0.0 && nu.mean() > 0.0,
            "multiplicative solve needs measures with nonzero mean");
    double edge = mu.support_max() * nu.support_max();
    require(z > edge, "multiplicative solve needs z above the product of support maxima");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    SubordinationSolution sol{ConvolutionKind::multiplicative, z, 0.0, 0.0, 0.0, nan, 0.0};

    if (mu.size() == 1 || nu.size() == 1) {
        // Multiplying by delta_c rescales the other measure by c.
        bool mu_point = mu.size() == 1;
        const DiscreteMeasure& other = mu_point ? nu : mu;
        double c = mu_point ? mu.atoms()[0] : nu.atoms()[0];
        require(c > 0.0, "point-mass factor must be positive");
        double u = j_transform(other, z / c);
        double omega = 1.0 / u;
        double omega_point = c * (1.0 + u) / u;
        double omega_other = z / c;
        sol.omega = omega;
        sol.omega_mu = mu_point ? omega_point : omega_other;
        sol.omega_nu = mu_point ? omega_other : omega_point;
        sol.residual = sol.omega_mu * sol.omega_nu - z * (omega + 1.0);
        verify_solution(sol, mu, &nu);
        return sol;
    }

    auto residual = [&](double u) {
        return detail::j_inverse(mu, u) * detail::j_inverse(nu, u) - z * (1.0 + u) / u;
    };
    auto residual_slope = [&](double u) {
        double wm = detail::j_inverse(mu, u), wn = detail::j_inverse(nu, u);
        double jm = cauchy_G(mu, wm) + wm * cauchy_G_derivative(mu, wm);
        double jn = cauchy_G(nu, wn) + wn * cauchy_G_derivative(nu, wn);
        return wn / jm + wm / jn + z / (u * u);
    };

    double pmin = mu.support_min() * nu.support_min();
    double lo = pmin > 0.0 ? pmin / (z - pmin) : 1e-8;
    double hi = edge / (z - edge);
    auto [blo, bhi] = detail::bracket_pos_to_neg(residual, lo, hi, "multiplicative solve");
    double u0 = 0.5 * (blo + bhi);
    double tol = 1e-12 * std::max(1.0, std::abs(z) * (1.0 + u0) / u0);
    double u = detail::bisect_then_newton(residual, residual_slope, blo, bhi, tol,
                                          "multiplicative solve");

    sol.omega = 1.0 / u;
    sol.omega_mu = detail::j_inverse(mu, u);
    sol.omega_nu = detail::j_inverse(nu, u);
    sol.residual = residual(u);
    verify_solution(sol, mu, &nu);
    return sol;
}

/// Subordination point for free compression by tau at z: the unique
/// omega > max(z, E_plus) with (omega - z)/(1 - tau) * G_mu(omega) = 1.
inline SubordinationSolution solve_compression(const DiscreteMeasure& mu, double tau,
                                               double z) {
    require(tau > 0.0 && tau < 1.0, "compression needs tau in (0,1)");
    require(z > mu.support_max(), "compression solve needs z above the support");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    SubordinationSolution sol{ConvolutionKind::compression, z, 0.0, nan, nan, tau, 0.0};

    if (mu.size() == 1) {
        double c = mu.atoms()[0];
        sol.omega = (z - (1.0 - tau) * c) / tau;
        sol.residual = (sol.omega - z) / (1.0 - tau) * cauchy_G(mu, sol.omega) - 1.0;
        verify_solution(sol, mu);
        return sol;
    }

    auto residual = [&](double w) {
        return (w - z) / (1.0 - tau) * cauchy_G(mu, w) - 1.0;
    };
    auto residual_slope = [&](double w) {
        return (cauchy_G(mu, w) + (w - z) * cauchy_G_derivative(mu, w)) / (1.0 - tau);
    };

    // residual -> -1 as omega -> z+ and -> tau/(1-tau) > 0 as omega -> inf;
    // reuse the pos-to-neg bracketing on the shifted variable t = omega - z
    // with flipped sign.
    auto flipped = [&](double t) { return -residual(z + t); };
    double scale = std::max(1.0, std::abs(z));
    auto [tlo, thi] = detail::bracket_pos_to_neg(flipped, 1e-6 * scale, scale,
                                                 "compression solve");
    auto neg_slope = [&](double t) { return -residual_slope(z + t); };
    double tol = 1e-12;
    double t = detail::bisect_then_newton(flipped, neg_slope, tlo, thi, tol,
                                          "compression solve");

    sol.omega = z + t;
    sol.residual = residual(sol.omega);
    verify_solution(sol, mu);
    return sol;
}

/// Cauchy transform of the convolved / compressed measure at the solved z.
inline double free_cauchy(const SubordinationSolution& s) {
    switch (s.kind) {
        case ConvolutionKind::additive: return 1.0 / s.omega;
        case ConvolutionKind::multiplicative: return (s.omega + 1.0) / (s.z * s.omega);
        default: return (1.0 - s.tau) / s.tau / (s.omega - s.z);
    }
}

/// Log potential int log(z - x) of the result measure, evaluated through
/// the subordination points:
///   convolutions:  -log omega + int log(omega_mu - x) dmu
///                             + int log(omega_nu - y) dnu
///   compression:   (1/tau) int log(omega - x) dmu + log tau
///                  - ((1-tau)/tau) log((omega - z)/(1-tau))
inline double free_log_potential(const SubordinationSolution& s, const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu) {
    require(s.kind != ConvolutionKind::compression,
            "compression log potential takes a single measure");
    return -std::log(s.omega) + log_potential(mu, s.omega_mu) +
           log_potential(nu, s.omega_nu);
}

inline double free_log_potential(const SubordinationSolution& s,
                                 const DiscreteMeasure& mu) {
    require(s.kind == ConvolutionKind::compression,
            "two-measure log potential needs both measures");
    double tau = s.tau;
    return log_potential(mu, s.omega) / tau + std::log(tau) -
           (1.0 - tau) / tau * std::log((s.omega - s.z) / (1.0 - tau));
}

struct GridPoint {
    double z;
    double cauchy;
    double log_potential;
};

/// Tabulate G and the log potential of mu (+|x) nu over a z grid.
inline std::vector<GridPoint> free_convolve_grid(const DiscreteMeasure& mu,
                                                 const DiscreteMeasure& nu,
                                                 ConvolutionKind kind,
                                                 const std::vector<double>& z_grid) {
    require(kind != ConvolutionKind::compression,
            "compression grids go through compression_grid");
    std::vector<GridPoint> out;
    out.reserve(z_grid.size());
    for (double z : z_grid) {
        auto s = kind == ConvolutionKind::additive ? solve_additive(mu, nu, z)
                                                   : solve_multiplicative(mu, nu, z);
        out.push_back({z, free_cauchy(s), free_log_potential(s, mu, nu)});
    }
    return out;
}

inline std::vector<GridPoint> compression_grid(const DiscreteMeasure& mu, double tau,
                                               const std::vector<double>& z_grid) {
    std::vector<GridPoint> out;
    out.reserve(z_grid.size());
    for (double z : z_grid) {
        auto s = solve_compression(mu, tau, z);
        out.push_back({z, free_cauchy(s), free_log_potential(s, mu)});
    }
    return out;
}

}  // namespace freeprob
