#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include "freeprob/common.hpp"
#include "freeprob/measure.hpp"
#include "freeprob/subordination.hpp"

namespace freeprob {

/// Cost specification for the entropic transport problems. The cost is
/// log(z - x*y) for the convolutions (with * the group operation) and
/// 1[y > 1-tau] log(z - x) for compression, whose second marginal is the
/// two-atom measure (1-tau) delta_0 + tau delta_1.
struct CostSpec {
    ConvolutionKind kind;
    double z;
    double tau;

    static CostSpec additive(double z) {
        return {ConvolutionKind::additive, z, std::numeric_limits<double>::quiet_NaN()};
    }
    static CostSpec multiplicative(double z) {
        return {ConvolutionKind::multiplicative, z,
                std::numeric_limits<double>::quiet_NaN()};
    }
    static CostSpec compression(double z, double tau) {
        require(tau > 0.0 && tau < 1.0, "compression needs tau in (0,1)");
        return {ConvolutionKind::compression, z, tau};
    }
};

/// Canonical second marginal of the compression transport problem.
inline DiscreteMeasure compression_marginal(double tau) {
    require(tau > 0.0 && tau < 1.0, "compression needs tau in (0,1)");
    return DiscreteMeasure({0.0, 1.0}, {1.0 - tau, tau});
}

struct KernelMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> entries;  // row-major

    double operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
};

/// Exponentiated cost K = e^c, entrywise positive on valid inputs.
inline KernelMatrix build_kernel(const CostSpec& cost, const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu) {
    KernelMatrix K;
    K.rows = mu.size();
    K.cols = nu.size();
    K.entries.resize(K.rows * K.cols);
    for (std::size_t i = 0; i < K.rows; ++i)
        for (std::size_t j = 0; j < K.cols; ++j) {
            double x = mu.atoms()[i], y = nu.atoms()[j];
            double v;
            switch (cost.kind) {
                case ConvolutionKind::additive: v = cost.z - (x + y); break;
                case ConvolutionKind::multiplicative: v = cost.z - x * y; break;
                default:
                    v = y > 1.0 - cost.tau ? cost.z - x : 1.0;
                    break;
            }
            require(v > 0.0, "kernel entry nonpositive: z does not dominate the cost");
            K.entries[i * K.cols + j] = v;
        }
    return K;
}

struct CouplingSolution {
    std::size_t rows = 0, cols = 0;
    std::vector<double> pi;  // row-major, rows x cols
    std::vector<double> a_pot, b_pot;
    double value = 0.0;  // potential-form objective
    std::size_t iterations = 0;
    double marginal_residual = 0.0;
    std::vector<double> residual_history;
};

struct MultiKernel {
    std::vector<std::size_t> dims;
    std::vector<double> entries;  // dense, last index fastest
};

struct MultiCouplingSolution {
    std::vector<std::size_t> dims;
    std::vector<double> pi;
    std::vector<std::vector<double>> potentials;
    double value = 0.0;
    std::size_t iterations = 0;
    double marginal_residual = 0.0;
    std::vector<double> residual_history;
};

inline MultiKernel build_multi_kernel(ConvolutionKind kind, double z,
                                      const std::vector<DiscreteMeasure>& margins) {
    require(kind != ConvolutionKind::compression,
            "multi-marginal kernels cover the two convolution costs");
    std::size_t d = margins.size();
    require(d >= 2 && d <= 4, "multi-marginal kernel needs 2 to 4 margins");
    MultiKernel K;
    std::size_t total = 1;
    for (auto& m : margins) {
        K.dims.push_back(m.size());
        total *= m.size();
    }
    require(d * total <= 1000000, "dense multi-marginal tensor exceeds the size cap");
    K.entries.resize(total);
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t t = 0; t < total; ++t) {
        double acc = kind == ConvolutionKind::additive ? 0.0 : 1.0;
        for (std::size_t l = 0; l < d; ++l) {
            double x = margins[l].atoms()[idx[l]];
            acc = kind == ConvolutionKind::additive ? acc + x : acc * x;
        }
        double v = z - acc;
        require(v > 0.0, "kernel entry nonpositive: z does not dominate the cost");
        K.entries[t] = v;
        for (std::size_t l = d; l-- > 0;) {
            if (++idx[l] < K.dims[l]) break;
            idx[l] = 0;
        }
    }
    return K;
}

namespace detail {

// One dense Sinkhorn pass target: for margin m, S[i] = sum over all tensor
// cells with i_m = i of K * prod_{l != m} (w^l u^l). The log-domain variant
// accumulates the same sums with a streaming log-sum-exp, used when the
// kernel has entries small enough to underflow the plain path.
class TensorScaler {
public:
    TensorScaler(const MultiKernel& K, const std::vector<DiscreteMeasure>& margins,
                 bool log_domain)
        : K_(K), margins_(margins), log_domain_(log_domain) {
        d_ = K.dims.size();
        total_ = K.entries.size();
        log_u_.resize(d_);
        for (std::size_t l = 0; l < d_; ++l) log_u_[l].assign(K.dims[l], 0.0);
        log_K_.resize(total_);
        for (std::size_t t = 0; t < total_; ++t) log_K_[t] = std::log(K.entries[t]);
        log_w_.resize(d_);
        for (std::size_t l = 0; l < d_; ++l) {
            log_w_[l].resize(K.dims[l]);
            for (std::size_t i = 0; i < K.dims[l]; ++i)
                log_w_[l][i] = std::log(margins[l].weights()[i]);
        }
    }

    void update_margin(std::size_t m) {
        std::size_t n = K_.dims[m];
        if (!log_domain_) {
            std::vector<double> S(n, 0.0);
            for_each_cell([&](std::size_t t, const std::vector<std::size_t>& idx) {
                double p = K_.entries[t];
                for (std::size_t l = 0; l < d_; ++l)
                    if (l != m)
                        p *= margins_[l].weights()[idx[l]] * std::exp(log_u_[l][idx[l]]);
                S[idx[m]] += p;
            });
            for (std::size_t i = 0; i < n; ++i) log_u_[m][i] = -std::log(S[i]);
        } else {
            std::vector<double> mx(n, -std::numeric_limits<double>::infinity());
            std::vector<double> sm(n, 0.0);
            for_each_cell([&](std::size_t t, const std::vector<std::size_t>& idx) {
                double v = log_K_[t];
                for (std::size_t l = 0; l < d_; ++l)
                    if (l != m) v += log_w_[l][idx[l]] + log_u_[l][idx[l]];
                std::size_t b = idx[m];
                if (v > mx[b]) {
                    sm[b] = sm[b] * std::exp(mx[b] - v) + 1.0;
                    mx[b] = v;
                } else {
                    sm[b] += std::exp(v - mx[b]);
                }
            });
            for (std::size_t i = 0; i < n; ++i) log_u_[m][i] = -(mx[i] + std::log(sm[i]));
        }
    }

    // max over margins and atoms of |marginal(pi) - w|
    double marginal_residual() const {
        std::vector<std::vector<double>> sums(d_);
        for (std::size_t l = 0; l < d_; ++l) sums[l].assign(K_.dims[l], 0.0);
        for_each_cell([&](std::size_t t, const std::vector<std::size_t>& idx) {
            double p = cell_mass(t, idx);
            for (std::size_t l = 0; l < d_; ++l) sums[l][idx[l]] += p;
        });
        double r = 0.0;
        for (std::size_t l = 0; l < d_; ++l)
            for (std::size_t i = 0; i < K_.dims[l]; ++i)
                r = std::max(r, std::abs(sums[l][i] - margins_[l].weights()[i]));
        return r;
    }

    // shift log-potentials so every margin contributes the same weighted
    // log-sum; the total (and hence pi and the value) is unchanged
    void balance_gauge() {
        std::vector<double> L(d_, 0.0);
        double mean = 0.0;
        for (std::size_t l = 0; l < d_; ++l) {
            NeumaierSum s;
            for (std::size_t i = 0; i < K_.dims[l]; ++i)
                s.add(margins_[l].weights()[i] * log_u_[l][i]);
            L[l] = s.value();
            mean += L[l] / static_cast<double>(d_);
        }
        for (std::size_t l = 0; l < d_; ++l)
            for (std::size_t i = 0; i < K_.dims[l]; ++i) log_u_[l][i] += mean - L[l];
    }

    double potential_value() const {
        NeumaierSum s;
        for (std::size_t l = 0; l < d_; ++l)
            for (std::size_t i = 0; i < K_.dims[l]; ++i)
                s.add(-margins_[l].weights()[i] * log_u_[l][i]);
        return s.value();
    }

    std::vector<double> coupling() const {
        std::vector<double> pi(total_);
        for_each_cell([&](std::size_t t, const std::vector<std::size_t>& idx) {
            pi[t] = cell_mass(t, idx);
        });
        return pi;
    }

    std::vector<std::vector<double>> potentials() const {
        std::vector<std::vector<double>> u(d_);
        for (std::size_t l = 0; l < d_; ++l) {
            u[l].resize(K_.dims[l]);
            for (std::size_t i = 0; i < K_.dims[l]; ++i) u[l][i] = std::exp(log_u_[l][i]);
        }
        return u;
    }

private:
    double cell_mass(std::size_t t, const std::vector<std::size_t>& idx) const {
        double lv = log_K_[t];
        for (std::size_t l = 0; l < d_; ++l) lv += log_w_[l][idx[l]] + log_u_[l][idx[l]];
        return std::exp(lv);
    }

    template <class F>
    void for_each_cell(F&& f) const {
        std::vector<std::size_t> idx(d_, 0);
        for (std::size_t t = 0; t < total_; ++t) {
            f(t, idx);
            for (std::size_t l = d_; l-- > 0;) {
                if (++idx[l] < K_.dims[l]) break;
                idx[l] = 0;
            }
        }
    }

    const MultiKernel& K_;
    const std::vector<DiscreteMeasure>& margins_;
    bool log_domain_;
    std::size_t d_ = 0, total_ = 0;
    std::vector<double> log_K_;
    std::vector<std::vector<double>> log_w_;
    std::vector<std::vector<double>> log_u_;
};

inline bool needs_log_domain(const std::vector<double>& kernel_entries) {
    double mn = *std::min_element(kernel_entries.begin(), kernel_entries.end());
    return mn < 1e-3;
}

}  // namespace detail

/// Cyclic Sinkhorn scaling over d potential vectors on a dense cost tensor.
inline MultiCouplingSolution multimarginal_sinkhorn(
    const MultiKernel& K, const std::vector<DiscreteMeasure>& margins, double tol = 1e-12,
    std::size_t max_iter = 100000) {
    require(K.dims.size() == margins.size(), "kernel order and margin count differ");
    for (std::size_t l = 0; l < margins.size(); ++l)
        require(K.dims[l] == margins[l].size(), "kernel extent and margin size differ");
    for (double e : K.entries) require(e > 0.0, "Sinkhorn needs a strictly positive kernel");

    detail::TensorScaler scaler(K, margins, detail::needs_log_domain(K.entries));
    MultiCouplingSolution out;
    out.dims = K.dims;

    double residual = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    for (; it < max_iter; ++it) {
        for (std::size_t m = 0; m < margins.size(); ++m) scaler.update_margin(m);
        residual = scaler.marginal_residual();
        out.residual_history.push_back(residual);
        if (residual < tol) break;
    }
    if (residual >= tol) {
        std::ostringstream msg;
        msg << "Sinkhorn did not reach tolerance " << tol << " after " << max_iter
            << " iterations (marginal residual " << residual << ")";
        throw convergence_error(msg.str());
    }

    scaler.balance_gauge();
    out.iterations = it + 1;
    out.marginal_residual = residual;
    out.value = scaler.potential_value();
    out.pi = scaler.coupling();
    out.potentials = scaler.potentials();
    return out;
}

/// Two-marginal Sinkhorn; a thin view over the tensor core so the d = 2
/// multi-marginal path is the same code.
inline CouplingSolution sinkhorn(const KernelMatrix& K, const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu, double tol = 1e-12,
                                 std::size_t max_iter = 100000) {
    require(K.rows == mu.size() && K.cols == nu.size(), "kernel shape mismatch");
    MultiKernel mk;
    mk.dims = {K.rows, K.cols};
    mk.entries = K.entries;
    auto m = multimarginal_sinkhorn(mk, {mu, nu}, tol, max_iter);

    CouplingSolution out;
    out.rows = K.rows;
    out.cols = K.cols;
    out.a_pot = m.potentials[0];
    out.b_pot = m.potentials[1];
    out.value = m.value;
    out.iterations = m.iterations;
    out.marginal_residual = m.marginal_residual;
    out.residual_history = std::move(m.residual_history);
    // pi_ij = mu_i nu_j a_i b_j K_ij, exactly in this form
    out.pi.resize(K.rows * K.cols);
    for (std::size_t i = 0; i < K.rows; ++i)
        for (std::size_t j = 0; j < K.cols; ++j)
            out.pi[i * K.cols + j] = mu.weights()[i] * nu.weights()[j] * out.a_pot[i] *
                                     out.b_pot[j] * K(i, j);
    return out;
}

/// Objective value of a converged coupling. Computed from the potentials
/// (-E_mu[log a] - E_nu[log b]) and cross-checked against the direct form
/// E_pi[log K] - KL(pi | mu x nu).
inline double ot_value(const CouplingSolution& sol, const CostSpec& cost,
                       const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    auto K = build_kernel(cost, mu, nu);
    NeumaierSum direct;
    for (std::size_t i = 0; i < sol.rows; ++i)
        for (std::size_t j = 0; j < sol.cols; ++j) {
            double p = sol.pi[i * sol.cols + j];
            if (p <= 0.0) continue;
            direct.add(p * std::log(K(i, j)));
            direct.add(-p * std::log(p / (mu.weights()[i] * nu.weights()[j])));
        }
    if (std::abs(direct.value() - sol.value) > 1e-8)
        throw convergence_error("objective forms disagree beyond 1e-8");
    return sol.value;
}

/// E_pi[1/(z - x*y)] for the convolutions; for compression only the y = 1
/// column contributes, giving E_pi[1[y > 1-tau]/(z - x)].
inline double coupling_cauchy(const CouplingSolution& sol, const CostSpec& cost,
                              const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    NeumaierSum s;
    for (std::size_t i = 0; i < sol.rows; ++i)
        for (std::size_t j = 0; j < sol.cols; ++j) {
            double x = mu.atoms()[i], y = nu.atoms()[j];
            double p = sol.pi[i * sol.cols + j];
            switch (cost.kind) {
                case ConvolutionKind::additive: s.add(p / (cost.z - (x + y))); break;
                case ConvolutionKind::multiplicative: s.add(p / (cost.z - x * y)); break;
                default:
                    if (y > 1.0 - cost.tau) s.add(p / (cost.z - x));
                    break;
            }
        }
    return s.value();
}

/// Unregularized bounds over deterministic pairings of equal-weight
/// quantile grids for the additive cost. The integrand log(z - x - y) is
/// strictly submodular, so over all couplings the expectation is maximized
/// by the antitone pairing and minimized by the comonotone one.
struct MongeBounds {
    double inf_value;
    double sup_value;
};

inline MongeBounds monge_bounds(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                double z, std::size_t grid = 1024) {
    require(z > mu.support_max() + nu.support_max(),
            "Monge bounds need z above the sum of support maxima");
    require(grid >= 1, "grid size must be positive");
    std::vector<double> xs(grid), ys(grid);
    for (std::size_t k = 0; k < grid; ++k) {
        double t = (static_cast<double>(k) + 0.5) / static_cast<double>(grid);
        xs[k] = mu.quantile(t);
        ys[k] = nu.quantile(t);
    }
    NeumaierSum lo, hi;
    for (std::size_t k = 0; k < grid; ++k) {
        lo.add(std::log(z - xs[k] - ys[k]));
        hi.add(std::log(z - xs[k] - ys[grid - 1 - k]));
    }
    double n = static_cast<double>(grid);
    return {lo.value() / n, hi.value() / n};
}

/// Exact Monge values for discrete marginals: the comonotone and antitone
/// couplings built by mass-splitting across the sorted atoms, with no
/// quantile-grid discretization error.
inline MongeBounds monge_bounds_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                      double z) {
    require(z > mu.support_max() + nu.support_max(),
            "Monge bounds need z above the sum of support maxima");
    auto pairing_value = [&](bool antitone) {
        NeumaierSum v;
        std::size_t i = 0, jj = 0;
        auto col = [&](std::size_t t) { return antitone ? nu.size() - 1 - t : t; };
        double wi = mu.weights()[0];
        double wj = nu.weights()[col(0)];
        while (i < mu.size() && jj < nu.size()) {
            double w = std::min(wi, wj);
            if (w > 0.0) v.add(w * std::log(z - mu.atoms()[i] - nu.atoms()[col(jj)]));
            wi -= w;
            wj -= w;
            // 1e-15 absorbs subtraction residue so exhausted cells advance
            if (wi <= 1e-15) {
                ++i;
                if (i < mu.size()) wi = mu.weights()[i];
            }
            if (wj <= 1e-15) {
                ++jj;
                if (jj < nu.size()) wj = nu.weights()[col(jj)];
            }
        }
        return v.value();
    };
    return {pairing_value(false), pairing_value(true)};
}

/// Direct maximization of the one-parameter family of 2x2 couplings,
/// used as an independent oracle for the scaling solver. q is the mass on
/// the (x_1, y_1) cell; the remaining cells are fixed by the marginals.
struct BruteForceResult {
    double q;
    double value;
};

inline BruteForceResult brute_force_2x2(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                        const CostSpec& cost) {
    require(mu.size() == 2 && nu.size() == 2, "brute force oracle needs 2x2 marginals");
    auto K = build_kernel(cost, mu, nu);
    double m1 = mu.weights()[0], n1 = nu.weights()[0];

    auto objective = [&](double q) {
        double cells[4] = {q, m1 - q, n1 - q, 1.0 - m1 - n1 + q};
        double ref[4] = {m1 * n1, m1 * (1.0 - n1), (1.0 - m1) * n1,
                         (1.0 - m1) * (1.0 - n1)};
        NeumaierSum s;
        for (int c = 0; c < 4; ++c) {
            if (cells[c] <= 0.0) continue;  // 0 log 0 = 0
            s.add(cells[c] * std::log(K.entries[c]));
            s.add(-cells[c] * std::log(cells[c] / ref[c]));
        }
        return s.value();
    };

    double lo = std::max(0.0, m1 + n1 - 1.0), hi = std::min(m1, n1);
    // golden-section search; the objective is strictly concave in q
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = objective(c), fd = objective(d);
    for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = objective(d);
        }
    }
    double q = 0.5 * (lo + hi);
    return {q, objective(q)};
}

}  // namespace freeprob
