#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "freeprob/common.hpp"

namespace freeprob {

using BigInt = boost::multiprecision::cpp_int;

/// Joint block histogram of a d-tuple of permutations of {0,...,N-1}:
/// counts[r] is the number of indices i whose images sigma_j(i) fall in
/// slab r_j on every axis j, where the m slabs split the values into
/// consecutive runs of N/m. Stored row-major, axis 0 slowest.
struct BlockHistogram {
    int N = 0;
    int m = 1;
    int d = 2;
    std::vector<std::int64_t> counts;

    std::size_t index(const std::vector<int>& r) const {
        require(static_cast<int>(r.size()) == d, "block index needs d coordinates");
        std::size_t idx = 0;
        for (int c : r) {
            require(c >= 0 && c < m, "block coordinate out of range");
            idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(c);
        }
        return idx;
    }

    std::int64_t& at(const std::vector<int>& r) { return counts[index(r)]; }
    std::int64_t at(const std::vector<int>& r) const { return counts[index(r)]; }

    /// Every axis-j slab must collect exactly N/m indices; permutation
    /// tuples satisfy this by bijectivity, so anything else counts zero.
    bool marginals_consistent() const {
        for (std::int64_t c : counts)
            if (c < 0) return false;
        std::size_t block = counts.size();
        for (int axis = 0; axis < d; ++axis) {
            block /= static_cast<std::size_t>(m);
            std::vector<std::int64_t> slab(static_cast<std::size_t>(m), 0);
            for (std::size_t idx = 0; idx < counts.size(); ++idx)
                slab[(idx / block) % static_cast<std::size_t>(m)] += counts[idx];
            for (std::int64_t s : slab)
                if (s != N / m) return false;
        }
        return true;
    }
};

inline BlockHistogram make_histogram(int N, int m, int d) {
    require(N >= 1 && N <= 1 << 20, "N must be in [1, 2^20]");
    require(m >= 1 && d >= 2, "need m >= 1 and d >= 2");
    require(N % m == 0, "m must divide N");
    double cells = std::pow(static_cast<double>(m), d);
    require(cells <= static_cast<double>(1 << 20), "m^d too large");
    BlockHistogram h;
    h.N = N;
    h.m = m;
    h.d = d;
    h.counts.assign(static_cast<std::size_t>(cells + 0.5), 0);
    return h;
}

namespace detail {

inline BigInt big_factorial(int n) {
    BigInt f = 1;
    for (int t = 2; t <= n; ++t) f *= t;
    return f;
}

inline double lf(std::int64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace detail

/// Number of d-tuples of permutations of {0,...,N-1} realizing the given
/// block histogram: N! ((N/m)!)^{md} / prod_r N_r!. Exact; zero when the
/// marginals are inconsistent.
inline BigInt tuple_count(const BlockHistogram& h) {
    require(h.N >= 1 && h.m >= 1 && h.N % h.m == 0 && h.d >= 2, "invalid histogram shape");
    if (!h.marginals_consistent()) return 0;
    BigInt numerator = detail::big_factorial(h.N);
    BigInt slab = detail::big_factorial(h.N / h.m);
    for (int t = 0; t < h.m * h.d; ++t) numerator *= slab;
    BigInt denominator = 1;
    for (std::int64_t c : h.counts)
        if (c > 1) denominator *= detail::big_factorial(static_cast<int>(c));
    BigInt q, r;
    boost::multiprecision::divide_qr(numerator, denominator, q, r);
    require(r == 0, "tuple count must be an integer");
    return q;
}

/// (1/N) log( tuple_count / (N!)^d ), evaluated in log-gamma arithmetic so
/// no factorial is ever materialized in floating point. Always <= 0.
inline double block_log_probability(const BlockHistogram& h) {
    require(h.N >= 1 && h.m >= 1 && h.N % h.m == 0 && h.d >= 2, "invalid histogram shape");
    require(h.marginals_consistent(), "histogram marginals are inconsistent");
    double lg = detail::lf(h.N) + static_cast<double>(h.m * h.d) * detail::lf(h.N / h.m);
    for (std::int64_t c : h.counts) lg -= detail::lf(c);
    lg -= static_cast<double>(h.d) * detail::lf(h.N);
    return lg / static_cast<double>(h.N);
}

/// sum_r m^{-d} gamma_r log gamma_r with gamma_r = N_r m^d / N and
/// 0 log 0 = 0. Nonnegative, zero exactly on the flat histogram; the
/// negated block log-probability converges to it at rate O(1/N).
inline double rate_functional(const BlockHistogram& h) {
    require(h.N >= 1 && h.m >= 1 && h.N % h.m == 0 && h.d >= 2, "invalid histogram shape");
    double md = std::pow(static_cast<double>(h.m), h.d);
    NeumaierSum s;
    for (std::int64_t c : h.counts) {
        if (c == 0) continue;
        double gamma = static_cast<double>(c) * md / static_cast<double>(h.N);
        s.add(gamma * std::log(gamma) / md);
    }
    return s.value();
}

/// Histogram of an explicit tuple of permutations (0-based value vectors).
inline BlockHistogram histogram_of_tuple(const std::vector<std::vector<int>>& perms, int m) {
    require(perms.size() >= 2, "need at least two permutations");
    int d = static_cast<int>(perms.size());
    int n = static_cast<int>(perms[0].size());
    auto h = make_histogram(n, m, d);
    std::vector<bool> seen(static_cast<std::size_t>(n));
    for (const auto& p : perms) {
        require(static_cast<int>(p.size()) == n, "permutations must share one length");
        std::fill(seen.begin(), seen.end(), false);
        for (int v : p) {
            require(v >= 0 && v < n && !seen[static_cast<std::size_t>(v)],
                    "input is not a permutation of 0..N-1");
            seen[static_cast<std::size_t>(v)] = true;
        }
    }
    int slab = n / m;
    std::vector<int> r(static_cast<std::size_t>(d));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j)
            r[static_cast<std::size_t>(j)] = perms[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] / slab;
        ++h.at(r);
    }
    return h;
}

/// Histogram of d independent uniform permutations.
inline BlockHistogram sample_histogram(int N, int m, int d, std::uint64_t seed) {
    require(d >= 2, "need d >= 2");
    std::mt19937_64 rng(seed);
    std::vector<std::vector<int>> perms(static_cast<std::size_t>(d),
                                        std::vector<int>(static_cast<std::size_t>(N)));
    for (auto& p : perms) {
        std::iota(p.begin(), p.end(), 0);
        std::shuffle(p.begin(), p.end(), rng);
    }
    return histogram_of_tuple(perms, m);
}

/// gamma_r = 1 everywhere; needs m^d | N.
inline BlockHistogram flat_histogram(int N, int m, int d) {
    auto h = make_histogram(N, m, d);
    std::size_t cells = h.counts.size();
    require(N % static_cast<int>(cells) == 0, "flat histogram needs m^d | N");
    std::fill(h.counts.begin(), h.counts.end(),
              static_cast<std::int64_t>(N) / static_cast<std::int64_t>(cells));
    return h;
}

/// All mass on the diagonal blocks r = (v, ..., v); the histogram of d
/// equal permutations.
inline BlockHistogram concentrated_histogram(int N, int m, int d) {
    auto h = make_histogram(N, m, d);
    std::vector<int> r(static_cast<std::size_t>(d));
    for (int v = 0; v < m; ++v) {
        std::fill(r.begin(), r.end(), v);
        h.at(r) = N / m;
    }
    return h;
}

struct LdpRow {
    int N = 0;
    double log_probability = 0.0;
    double rate = 0.0;
    double gap = 0.0;  // log_probability + rate, O(1/N)
};

/// Convergence table of block_log_probability + rate_functional for one
/// histogram family across sizes.
inline std::vector<LdpRow> ldp_convergence(const std::vector<int>& sizes, int m, int d,
                                           bool concentrated) {
    std::vector<LdpRow> rows;
    rows.reserve(sizes.size());
    for (int n : sizes) {
        auto h = concentrated ? concentrated_histogram(n, m, d) : flat_histogram(n, m, d);
        LdpRow row;
        row.N = n;
        row.log_probability = block_log_probability(h);
        row.rate = rate_functional(h);
        row.gap = row.log_probability + row.rate;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace freeprob
