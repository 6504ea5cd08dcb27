#pragma once

#include <cmath>
#include <utility>

#include "freeprob/common.hpp"
#include "freeprob/measure.hpp"

namespace freeprob {

/// Cauchy transform G(s) = sum_i w_i / (s - x_i), evaluated on the real
/// axis strictly right of the support, where it is positive, strictly
/// decreasing, and convex.
inline double cauchy_G(const DiscreteMeasure& m, double s) {
    require(s > m.support_max(), "Cauchy transform needs s above the support");
    NeumaierSum acc;
    for (std::size_t i = 0; i < m.size(); ++i)
        acc.add(m.weights()[i] / (s - m.atoms()[i]));
    return acc.value();
}

inline double cauchy_G_derivative(const DiscreteMeasure& m, double s) {
    require(s > m.support_max(), "Cauchy transform needs s above the support");
    NeumaierSum acc;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double d = s - m.atoms()[i];
        acc.add(-m.weights()[i] / (d * d));
    }
    return acc.value();
}

// G maps (E_plus, inf) onto (0, inf) for a finitely supported measure, so
// every g > 0 is attainable in exact arithmetic. This reports the ceiling
// reachable without stepping closer than eps to the support edge, which is
// the practical range for the inverse-based transforms.
inline double attainable_g_sup(const DiscreteMeasure& m, double eps = 1e-9) {
    return cauchy_G(m, m.support_max() + eps);
}

/// Inverse of the Cauchy transform on the real axis right of the support:
/// the unique s > E_plus with G(s) = g. Monotone bracketing, bisection,
/// then Newton polish to residual |G(s) - g| < 1e-12 * g.
inline double cauchy_inverse(const DiscreteMeasure& m, double g, double eps = 1e-9) {
    require(std::isfinite(g) && g > 0.0, "Cauchy inverse needs g > 0");
    double edge = m.support_max();

    double lo = edge + eps;
    for (int k = 0; cauchy_G(m, lo) < g; ++k) {
        if (k > 600 || lo <= edge || edge + (lo - edge) * 0.5 == edge)
            throw convergence_error("Cauchy inverse: g exceeds the attainable range");
        lo = edge + (lo - edge) * 0.5;
    }
    double hi = lo + std::max(1.0, std::abs(edge));
    for (int k = 0; cauchy_G(m, hi) > g; ++k) {
        if (k > 600) throw convergence_error("Cauchy inverse: bracket expansion failed");
        hi = edge + (hi - edge) * 2.0;
    }

    double s = 0.5 * (lo + hi);
    for (int k = 0; k < 60; ++k) {
        s = 0.5 * (lo + hi);
        if (cauchy_G(m, s) > g)
            lo = s;
        else
            hi = s;
    }
    for (int k = 0; k < 8; ++k) {
        double f = cauchy_G(m, s) - g;
        if (std::abs(f) < 1e-13 * g) break;
        double step = f / cauchy_G_derivative(m, s);
        double next = s - step;
        if (!(next > edge)) break;
        s = next;
    }
    if (std::abs(cauchy_G(m, s) - g) > 1e-12 * g)
        throw convergence_error("Cauchy inverse: residual above tolerance");
    return s;
}

/// R-transform R(g) = G^{-1}(g) - 1/g. Defined here for any g > 0 thanks
/// to the global monotonicity of G right of the support; callers wanting
/// the classical small-argument regime can consult attainable_g_sup.
inline double r_transform(const DiscreteMeasure& m, double g, double eps = 1e-9) {
    return cauchy_inverse(m, g, eps) - 1.0 / g;
}

/// Moment generating pair psi(u) = int ux/(1-ux) dm and its inverse chi.
/// Restricted to measures supported in [0, inf) with positive mean, which
/// keeps psi strictly increasing on each branch it is used on.
struct PsiChiPair {
    DiscreteMeasure measure;

    double psi(double u) const {
        NeumaierSum acc;
        for (std::size_t i = 0; i < measure.size(); ++i) {
            double d = 1.0 - u * measure.atoms()[i];
            require(d > 0.0, "psi evaluated at or beyond its pole");
            acc.add(measure.weights()[i] * u * measure.atoms()[i] / d);
        }
        return acc.value();
    }

    double psi_derivative(double u) const {
        NeumaierSum acc;
        for (std::size_t i = 0; i < measure.size(); ++i) {
            double d = 1.0 - u * measure.atoms()[i];
            acc.add(measure.weights()[i] * measure.atoms()[i] / (d * d));
        }
        return acc.value();
    }

    // psi is strictly increasing on (-inf, 1/E_plus) with psi(0) = 0,
    // psi -> +inf at the pole, and psi -> -(1 - m({0})) as u -> -inf.
    // chi inverts it there; w = 0 maps to u = 0.
    double chi(double w) const {
        require(std::isfinite(w), "chi needs a finite argument");
        if (w == 0.0) return 0.0;
        double pole = 1.0 / measure.support_max();
        double lo, hi;
        if (w > 0.0) {
            double gap = 0.5 * pole;
            while (psi(pole - gap) < w) {
                gap *= 0.5;
                if (gap < 1e-300) throw convergence_error("chi: bracket search failed");
            }
            lo = 0.0;
            hi = pole - gap;
        } else {
            double floor_w = -(1.0 - mass_at_zero());
            require(w > floor_w, "chi argument below the attainable range");
            lo = -1.0;
            for (int k = 0; psi(lo) > w; ++k) {
                if (k > 600) throw convergence_error("chi: bracket search failed");
                lo *= 2.0;
            }
            hi = 0.0;
        }
        double u = 0.5 * (lo + hi);
        for (int k = 0; k < 80; ++k) {
            u = 0.5 * (lo + hi);
            if (psi(u) < w)
                lo = u;
            else
                hi = u;
        }
        for (int k = 0; k < 8; ++k) {
            double f = psi(u) - w;
            if (std::abs(f) < 1e-13 * std::abs(w)) break;
            double next = u - f / psi_derivative(u);
            if (!(next < pole)) break;
            u = next;
        }
        if (std::abs(psi(u) - w) > 1e-10 * std::max(1.0, std::abs(w)))
            throw convergence_error("chi: residual above tolerance");
        return u;
    }

private:
    double mass_at_zero() const {
        for (std::size_t i = 0; i < measure.size(); ++i)
            if (measure.atoms()[i] == 0.0) return measure.weights()[i];
        return 0.0;
    }
};

inline PsiChiPair psi_and_chi(const DiscreteMeasure& m) {
    require(m.support_min() >= 0.0, "psi/chi need support in [0, inf)");
    require(m.mean() > 0.0, "psi/chi need a measure with nonzero mean");
    return PsiChiPair{m};
}

/// S-transform S(w) = ((1+w)/w) chi(w), for w in the attainable psi-range
/// punctured at 0.
inline double s_transform(const DiscreteMeasure& m, double w) {
    require(w != 0.0, "S-transform undefined at w = 0");
    return (1.0 + w) / w * psi_and_chi(m).chi(w);
}

/// J(s) = s G(s) - 1. For positive support this equals psi(1/s) and decays
/// like mean/s as s -> inf.
inline double j_transform(const DiscreteMeasure& m, double s) {
    return s * cauchy_G(m, s) - 1.0;
}

}  // namespace freeprob
