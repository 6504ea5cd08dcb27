#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "freeprob/common.hpp"
#include "freeprob/measure.hpp"
#include "freeprob/polynomial.hpp"
#include "freeprob/subordination.hpp"

namespace freeprob {

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;  // sample standard deviation / sqrt(samples)
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

namespace detail {

// product of integers in (from, to], exact in long double for our sizes
inline long double rising(unsigned from, unsigned to) {
    long double p = 1.0L;
    for (unsigned t = from + 1; t <= to; ++t) p *= static_cast<long double>(t);
    return p;
}

inline QPoly q_from_roots(const std::vector<double>& roots) {
    QPoly c{qfloat(1)};
    for (double r : roots) {
        QPoly next(c.size() + 1, qfloat(0));
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= qfloat(r) * c[k];
        }
        c = std::move(next);
    }
    return c;
}

inline qfloat q_rising(unsigned from, unsigned to) {
    qfloat p = 1;
    for (unsigned t = from + 1; t <= to; ++t) p *= qfloat(t);
    return p;
}

inline qfloat q_binom(unsigned n, unsigned k) {
    qfloat b = 1;
    for (unsigned t = 1; t <= k; ++t) b = b * qfloat(n - k + t) / qfloat(t);
    return b;
}

// signed elementary-symmetric view of a monic ascending-coefficient poly:
// p(z) = sum_i (-1)^i a_i z^{n-i} with a_i = (-1)^i c[n-i]
inline qfloat q_signed(const QPoly& c, unsigned i) {
    qfloat v = c[c.size() - 1 - i];
    return i % 2 == 0 ? v : -v;
}

// a^{add}_k = sum_{i+j=k} (N-i)!(N-j)! / (N!(N-k)!) a_i a'_j, summed by
// ascending magnitude in quad precision
inline QPoly q_additive(const QPoly& p, const QPoly& q) {
    unsigned n = static_cast<unsigned>(p.size() - 1);
    QPoly out(n + 1, qfloat(0));
    out[n] = 1;
    std::vector<qfloat> terms;
    for (unsigned k = 1; k <= n; ++k) {
        terms.clear();
        for (unsigned i = 0; i <= k; ++i) {
            unsigned j = k - i;
            // (N-i)!(N-j)! / (N!(N-k)!) = prod((N-k, N-j]) / prod((N-i, N])
            qfloat ratio = q_rising(n - k, n - j) / q_rising(n - i, n);
            terms.push_back(ratio * q_signed(p, i) * q_signed(q, j));
        }
        std::sort(terms.begin(), terms.end(),
                  [](qfloat u, qfloat v) { return qabs(u) < qabs(v); });
        qfloat s = 0, c = 0;
        for (qfloat t : terms) {
            qfloat y = t - c;
            qfloat u = s + y;
            c = (u - s) - y;
            s = u;
        }
        out[n - k] = k % 2 == 0 ? s : -s;
    }
    return out;
}

// a^{mul}_k = a_k a'_k / binom(N, k)
inline QPoly q_multiplicative(const QPoly& p, const QPoly& q) {
    unsigned n = static_cast<unsigned>(p.size() - 1);
    QPoly out(n + 1, qfloat(0));
    out[n] = 1;
    for (unsigned k = 1; k <= n; ++k) {
        qfloat v = q_signed(p, k) * q_signed(q, k) / q_binom(n, k);
        out[n - k] = k % 2 == 0 ? v : -v;
    }
    return out;
}

// [p]_k = (k!/N!) d^{N-k}/dz^{N-k} p, degree k, monic
inline QPoly q_compress(const QPoly& p, unsigned k) {
    unsigned n = static_cast<unsigned>(p.size() - 1);
    QPoly c = p;
    for (unsigned step = 0; step < n - k; ++step) {
        for (std::size_t t = 1; t < c.size(); ++t) c[t - 1] = qfloat(t) * c[t];
        c.pop_back();
    }
    qfloat scale = qfloat(1) / q_rising(k, n);
    for (auto& v : c) v *= scale;
    c.back() = 1;
    return c;
}

inline MonicPoly to_monic(const QPoly& q) {
    std::vector<double> c(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) c[k] = static_cast<double>(q[k]);
    c.back() = 1.0;
    return MonicPoly(std::move(c));
}

}  // namespace detail

/// Permanent of a dense real matrix via Ryser's formula with Gray-code
/// subset updates, O(2^N N). Hard cap N <= 22.
inline double permanent(const std::vector<std::vector<double>>& m) {
    std::size_t n = m.size();
    require(n >= 1, "permanent needs a nonempty matrix");
    require(n <= 22, "permanent limited to N <= 22 (cost 2^N N)");
    for (const auto& row : m) require(row.size() == n, "permanent needs a square matrix");

    std::vector<long double> rowsum(n, 0.0L);
    long double total = 0.0L;
    std::uint32_t prev_gray = 0;
    const std::uint32_t top = (1u << n) - 1u;
    for (std::uint32_t k = 1; k <= top; ++k) {
        std::uint32_t gray = k ^ (k >> 1);
        std::uint32_t diff = gray ^ prev_gray;
        int j = std::countr_zero(diff);
        long double sgn_col = (gray & diff) ? 1.0L : -1.0L;
        for (std::size_t i = 0; i < n; ++i)
            rowsum[i] += sgn_col * static_cast<long double>(m[i][j]);
        long double prod = 1.0L;
        for (std::size_t i = 0; i < n; ++i) prod *= rowsum[i];
        total += (std::popcount(gray) & 1u) ? -prod : prod;
        prev_gray = gray;
    }
    if (n & 1u) total = -total;
    return static_cast<double>(total);
}

/// E over uniform permutations s of prod_i (z - a_i o b_{s(i)}), which is
/// perm(M)/N! for M_ij = z - a_i o b_j. This is the permutation-quadrature
/// value of the finite free convolution's characteristic polynomial at z.
inline double perm_expected_charpoly_at(const std::vector<double>& a,
                                        const std::vector<double>& b, BinaryOp op,
                                        double z) {
    require(a.size() == b.size() && !a.empty(), "root lists must be nonempty and equal length");
    std::size_t n = a.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = z - apply_op(op, a[i], b[j]);
    long double fact = detail::rising(0, static_cast<unsigned>(n));
    return static_cast<double>(static_cast<long double>(permanent(m)) / fact);
}

/// Exhaustive permutation average of prod_i (z - a_i o b_{s(i)}); oracle for
/// the Ryser path, N <= 8.
inline double perm_expected_charpoly_at_exhaustive(const std::vector<double>& a,
                                                   const std::vector<double>& b,
                                                   BinaryOp op, double z) {
    require(a.size() == b.size() && !a.empty(), "root lists must be nonempty and equal length");
    std::size_t n = a.size();
    require(n <= 8, "exhaustive permutation oracle limited to N <= 8");
    std::vector<std::size_t> sigma(n);
    std::iota(sigma.begin(), sigma.end(), std::size_t{0});
    long double total = 0.0L;
    std::uint64_t count = 0;
    do {
        long double prod = 1.0L;
        for (std::size_t i = 0; i < n; ++i)
            prod *= static_cast<long double>(z - apply_op(op, a[i], b[sigma[i]]));
        total += prod;
        ++count;
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return static_cast<double>(total / static_cast<long double>(count));
}

/// Finite free additive convolution of two monic degree-N polynomials:
/// on the signed view p(z) = sum_i (-1)^i a_i z^{N-i},
///   a^{add}_k = sum_{i+j=k} (N-i)!(N-j)! / (N!(N-k)!) a_i a'_j.
/// Terms are combined by magnitude-sorted compensated summation in quad
/// precision; only the final coefficients are rounded to double.
inline MonicPoly finite_free_additive(const MonicPoly& p, const MonicPoly& q) {
    require(p.degree() == q.degree(), "additive convolution needs equal degrees");
    require(p.degree() >= 1 && p.degree() <= 64, "degree must be in [1, 64]");
    return detail::to_monic(detail::q_additive(detail::to_qpoly(p), detail::to_qpoly(q)));
}

/// Finite free multiplicative convolution: a^{mul}_k = a_k a'_k / binom(N,k).
/// Meaningful when at least one factor has nonnegative roots.
inline MonicPoly finite_free_multiplicative(const MonicPoly& p, const MonicPoly& q) {
    require(p.degree() == q.degree(), "multiplicative convolution needs equal degrees");
    require(p.degree() >= 1 && p.degree() <= 64, "degree must be in [1, 64]");
    return detail::to_monic(detail::q_multiplicative(detail::to_qpoly(p), detail::to_qpoly(q)));
}

/// Finite free compression to degree k: (k!/N!) d^{N-k}/dz^{N-k} p.
/// Matches the average of prod_{i in S}(z - r_i) over k-subsets S of roots.
inline MonicPoly finite_free_compress(const MonicPoly& p, unsigned k) {
    require(k >= 1 && k <= p.degree(), "compression degree must be in [1, N]");
    return detail::to_monic(detail::q_compress(detail::to_qpoly(p), k));
}

/// Roots of a finite free convolution, computed from the input roots with
/// the whole coefficient pipeline held in quad precision. Double-rounded
/// coefficients lose clustered roots at high degree; this path keeps them.
inline std::vector<double> convolution_roots(const std::vector<double>& a,
                                             const std::vector<double>& b, ConvolutionKind kind,
                                             unsigned k = 0) {
    require(!a.empty() && a.size() <= 64, "root list length must be in [1, 64]");
    if (kind == ConvolutionKind::compression) {
        require(k >= 1 && k <= a.size(), "compression degree must be in [1, N]");
        return detail::real_roots_q(detail::q_compress(detail::q_from_roots(a), k));
    }
    require(a.size() == b.size(), "root lists must have equal length");
    auto qa = detail::q_from_roots(a);
    auto qb = detail::q_from_roots(b);
    return detail::real_roots_q(kind == ConvolutionKind::additive
                                    ? detail::q_additive(qa, qb)
                                    : detail::q_multiplicative(qa, qb));
}

namespace detail {

/// Average of prod_{i in S}(z - r_i) over all k-subsets S; oracle for
/// finite_free_compress, N <= 20.
inline double subset_average_at(const std::vector<double>& roots, unsigned k, double z) {
    std::size_t n = roots.size();
    require(n >= 1 && n <= 20, "subset average limited to N <= 20");
    require(k >= 1 && k <= n, "subset size must be in [1, N]");
    long double total = 0.0L;
    std::uint64_t count = 0;
    std::uint32_t top = 1u << n;
    for (std::uint32_t s = 0; s < top; ++s) {
        if (static_cast<unsigned>(std::popcount(s)) != k) continue;
        long double prod = 1.0L;
        for (std::size_t i = 0; i < n; ++i)
            if (s & (1u << i)) prod *= static_cast<long double>(z - roots[i]);
        total += prod;
        ++count;
    }
    return static_cast<double>(total / static_cast<long double>(count));
}

/// Newton-form interpolation through (xs[t], ys[t]) expanded to ascending
/// monomial coefficients, long double arithmetic throughout.
inline std::vector<double> interpolate_coeffs(const std::vector<double>& xs,
                                              const std::vector<double>& ys) {
    std::size_t m = xs.size();
    require(m == ys.size() && m >= 1, "interpolation needs matching nonempty node lists");
    std::vector<long double> dd(ys.begin(), ys.end());
    for (std::size_t level = 1; level < m; ++level)
        for (std::size_t t = m - 1; t >= level; --t)
            dd[t] = (dd[t] - dd[t - 1]) /
                    (static_cast<long double>(xs[t]) - static_cast<long double>(xs[t - level]));
    // Horner expansion of the Newton form
    std::vector<long double> acc{dd[m - 1]};
    for (std::size_t t = m - 1; t-- > 0;) {
        std::vector<long double> next(acc.size() + 1, 0.0L);
        for (std::size_t u = 0; u < acc.size(); ++u) {
            next[u + 1] += acc[u];
            next[u] -= static_cast<long double>(xs[t]) * acc[u];
        }
        next[0] += dd[t];
        acc = std::move(next);
    }
    return std::vector<double>(acc.begin(), acc.end());
}

}  // namespace detail

/// Reconstructs the expected characteristic polynomial of the permutation
/// model by interpolating perm_expected_charpoly_at on N+1 integer nodes.
/// Independent of the coefficient formulas; used to validate them.
inline MonicPoly expected_charpoly_via_perm(const std::vector<double>& a,
                                            const std::vector<double>& b, BinaryOp op) {
    std::size_t n = a.size();
    require(n >= 1 && n <= 22, "interpolated reconstruction limited to N <= 22");
    double spread = 0.0;
    for (double v : a) spread = std::max(spread, std::abs(v));
    for (double v : b) spread = std::max(spread, std::abs(v));
    spread = std::max(1.0, 2.0 * spread);
    std::vector<double> xs(n + 1), ys(n + 1);
    for (std::size_t t = 0; t <= n; ++t) {
        // nodes straddle the root range to keep the Newton form tame
        xs[t] = spread * (2.0 * static_cast<double>(t) / static_cast<double>(n) - 1.0) * 2.0;
        ys[t] = perm_expected_charpoly_at(a, b, op, xs[t]);
    }
    auto c = detail::interpolate_coeffs(xs, ys);
    // force exact monicity; the interpolant's leading coefficient is 1 up to rounding
    require(std::abs(c.back() - 1.0) < 1e-6, "interpolated polynomial is not monic");
    c.back() = 1.0;
    return MonicPoly(std::move(c));
}

/// Exhaustive (d-1)-fold permutation average of
/// prod_i (z - a_1,i o a_2,s2(i) o ... o a_d,sd(i)); N <= 6, d <= 3.
inline double enum_perm_quadrature(const std::vector<std::vector<double>>& lists, BinaryOp op,
                                   double z) {
    std::size_t d = lists.size();
    require(d >= 2 && d <= 3, "exhaustive multi-list quadrature limited to d in {2, 3}");
    std::size_t n = lists[0].size();
    require(n >= 1 && n <= 6, "exhaustive multi-list quadrature limited to N <= 6");
    for (const auto& l : lists) require(l.size() == n, "all root lists must share one length");

    std::vector<std::size_t> s2(n), s3(n);
    std::iota(s2.begin(), s2.end(), std::size_t{0});
    long double total = 0.0L;
    std::uint64_t count = 0;
    do {
        if (d == 2) {
            long double prod = 1.0L;
            for (std::size_t i = 0; i < n; ++i)
                prod *= static_cast<long double>(z - apply_op(op, lists[0][i], lists[1][s2[i]]));
            total += prod;
            ++count;
        } else {
            std::iota(s3.begin(), s3.end(), std::size_t{0});
            do {
                long double prod = 1.0L;
                for (std::size_t i = 0; i < n; ++i) {
                    double folded = apply_op(op, apply_op(op, lists[0][i], lists[1][s2[i]]),
                                             lists[2][s3[i]]);
                    prod *= static_cast<long double>(z - folded);
                }
                total += prod;
                ++count;
            } while (std::next_permutation(s3.begin(), s3.end()));
        }
    } while (std::next_permutation(s2.begin(), s2.end()));
    return static_cast<double>(total / static_cast<long double>(count));
}

/// Monte-Carlo version of enum_perm_quadrature: each sample draws d-1
/// independent uniform permutations. Any d >= 2 and N up to 4096.
inline McEstimate mc_perm_quadrature(const std::vector<std::vector<double>>& lists, BinaryOp op,
                                     double z, std::uint64_t samples, std::uint64_t seed) {
    std::size_t d = lists.size();
    require(d >= 2, "multi-list quadrature needs at least two lists");
    std::size_t n = lists[0].size();
    require(n >= 1 && n <= 4096, "root list length must be in [1, 4096]");
    for (const auto& l : lists) require(l.size() == n, "all root lists must share one length");
    require(samples >= 100, "at least 100 samples required");

    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> sigma(d - 1, std::vector<std::size_t>(n));
    long double sum = 0.0L, sumsq = 0.0L;
    for (std::uint64_t s = 0; s < samples; ++s) {
        for (auto& sg : sigma) {
            std::iota(sg.begin(), sg.end(), std::size_t{0});
            std::shuffle(sg.begin(), sg.end(), rng);
        }
        long double prod = 1.0L;
        for (std::size_t i = 0; i < n; ++i) {
            double folded = lists[0][i];
            for (std::size_t l = 1; l < d; ++l)
                folded = apply_op(op, folded, lists[l][sigma[l - 1][i]]);
            prod *= static_cast<long double>(z - folded);
        }
        sum += prod;
        sumsq += prod * prod;
    }
    long double mean = sum / static_cast<long double>(samples);
    long double var = (sumsq - static_cast<long double>(samples) * mean * mean) /
                      static_cast<long double>(samples - 1);
    if (var < 0.0L) var = 0.0L;
    McEstimate est;
    est.mean = static_cast<double>(mean);
    est.stderr_ = static_cast<double>(std::sqrt(var / static_cast<long double>(samples)));
    est.samples = samples;
    est.seed = seed;
    return est;
}

/// One row of an asymptotic comparison: the degree, the finite free
/// normalized log value, and its distance from the limiting free value.
struct AsymptoticRow {
    int n = 0;
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

inline std::vector<double> quantile_grid(const DiscreteMeasure& m, int n) {
    std::vector<double> roots(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i)
        roots[static_cast<std::size_t>(i - 1)] =
            m.quantile(static_cast<double>(i) / static_cast<double>(n));
    return roots;
}

// (1/deg) log r(z); equals the mean of log(z - root) over the roots when z
// lies above all of them, without extracting any root
inline double normalized_log_value(const QPoly& r, double z, std::size_t deg) {
    qfloat v = eval(r, qfloat(z));
    require(v > 0, "evaluation point must exceed the support of the result");
    double vd = static_cast<double>(v);
    require_finite(vd, "polynomial value");
    return std::log(vd) / static_cast<double>(deg);
}

}  // namespace detail

/// For each N: build degree-N quantile-grid polynomials for the inputs,
/// apply the finite free operation in quad precision, and compare the
/// normalized log value at z with the subordination value of the limiting
/// free operation.
inline std::vector<AsymptoticRow> asymptotic_logdet_check(const DiscreteMeasure& mu,
                                                          const DiscreteMeasure& nu,
                                                          ConvolutionKind kind, double z,
                                                          const std::vector<int>& degrees,
                                                          double tau = 0.0) {
    require(kind != ConvolutionKind::compression || (tau > 0.0 && tau < 1.0),
            "compression needs tau in (0, 1)");
    double ref;
    if (kind == ConvolutionKind::additive) {
        auto sol = solve_additive(mu, nu, z);
        ref = free_log_potential(sol, mu, nu);
    } else if (kind == ConvolutionKind::multiplicative) {
        auto sol = solve_multiplicative(mu, nu, z);
        ref = free_log_potential(sol, mu, nu);
    } else {
        auto sol = solve_compression(mu, tau, z);
        ref = free_log_potential(sol, mu);
    }

    std::vector<AsymptoticRow> rows;
    rows.reserve(degrees.size());
    for (int n : degrees) {
        require(n >= 2 && n <= 64, "degree must be in [2, 64]");
        auto p = detail::q_from_roots(detail::quantile_grid(mu, n));
        double value;
        if (kind == ConvolutionKind::additive) {
            auto q = detail::q_from_roots(detail::quantile_grid(nu, n));
            value = detail::normalized_log_value(detail::q_additive(p, q), z,
                                                 static_cast<std::size_t>(n));
        } else if (kind == ConvolutionKind::multiplicative) {
            auto q = detail::q_from_roots(detail::quantile_grid(nu, n));
            value = detail::normalized_log_value(detail::q_multiplicative(p, q), z,
                                                 static_cast<std::size_t>(n));
        } else {
            double kf = tau * static_cast<double>(n);
            auto k = static_cast<unsigned>(std::llround(kf));
            require(std::abs(kf - static_cast<double>(k)) < 1e-9 && k >= 1,
                    "tau * N must be a positive integer for finite compression");
            value = detail::normalized_log_value(detail::q_compress(p, k), z, k);
        }
        rows.push_back({n, value, std::abs(value - ref)});
    }
    return rows;
}

}  // namespace freeprob
