#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <random>
#include <vector>

#include "freeprob/common.hpp"
#include "freeprob/finite_free.hpp"

namespace freeprob {

/// Haar-distributed unitary: complex Ginibre, QR, then divide out the phases
/// of R's diagonal so the factor is distribution-exact, not just unitary.
inline Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& rng) {
    require(n >= 1 && n <= 64, "matrix dimension must be in [1, 64]");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        std::complex<double> d = r(j, j);
        double a = std::abs(d);
        require(a > 0.0, "degenerate QR diagonal");
        q.col(j) *= d / a;
    }
    return q;
}

inline Eigen::MatrixXcd haar_unitary(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return haar_unitary(n, rng);
}

/// Operation applied to the random-rotation model inside mc_quadrature.
struct MatrixOp {
    enum class Kind { add, mul, minor } kind = Kind::add;
    int k = 0;  // retained corner size for Kind::minor

    static MatrixOp add() { return {Kind::add, 0}; }
    static MatrixOp mul() { return {Kind::mul, 0}; }
    static MatrixOp minor(int k) { return {Kind::minor, k}; }
};

namespace detail {

struct ChunkStats {
    std::uint64_t count = 0;
    long double mean = 0.0L;
    long double m2 = 0.0L;

    void push(long double x) {
        ++count;
        long double d = x - mean;
        mean += d / static_cast<long double>(count);
        m2 += d * (x - mean);
    }

    // count-weighted combination; order of merging is fixed by the caller
    void merge(const ChunkStats& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        long double d = o.mean - mean;
        std::uint64_t total = count + o.count;
        mean += d * static_cast<long double>(o.count) / static_cast<long double>(total);
        m2 += o.m2 + d * d * static_cast<long double>(count) *
                         static_cast<long double>(o.count) / static_cast<long double>(total);
        count = total;
    }
};

inline std::mt19937_64 chunk_rng(std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    return std::mt19937_64(seq);
}

// Fixed 256-sample chunks with per-chunk seeds, merged in chunk order, so
// the pooled statistics are byte-identical for every thread count.
template <typename SampleFn>
inline ChunkStats run_chunked(std::uint64_t samples, std::uint64_t seed, unsigned threads,
                              SampleFn&& sample) {
    constexpr std::uint64_t chunk_size = 256;
    std::uint64_t chunks = (samples + chunk_size - 1) / chunk_size;
    auto run_chunk = [&](std::uint64_t c) {
        std::uint64_t lo = c * chunk_size;
        std::uint64_t hi = std::min(samples, lo + chunk_size);
        auto rng = chunk_rng(seed, c);
        ChunkStats stats;
        for (std::uint64_t s = lo; s < hi; ++s) stats.push(sample(rng));
        return stats;
    };

    std::vector<ChunkStats> results(chunks);
    if (threads <= 1 || chunks == 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) results[c] = run_chunk(c);
    } else {
        std::vector<std::future<void>> pool;
        std::atomic<std::uint64_t> next{0};
        for (unsigned t = 0; t < threads; ++t)
            pool.push_back(std::async(std::launch::async, [&] {
                for (std::uint64_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1))
                    results[c] = run_chunk(c);
            }));
        for (auto& f : pool) f.get();
    }
    ChunkStats total;
    for (const auto& s : results) total.merge(s);
    return total;
}

inline McEstimate to_estimate(const ChunkStats& total, std::uint64_t seed) {
    long double var =
        total.count > 1 ? total.m2 / static_cast<long double>(total.count - 1) : 0.0L;
    if (var < 0.0L) var = 0.0L;
    McEstimate est;
    est.mean = static_cast<double>(total.mean);
    est.stderr_ = static_cast<double>(std::sqrt(var / static_cast<long double>(total.count)));
    est.samples = total.count;
    est.seed = seed;
    return est;
}

inline long double mc_sample_value(const std::vector<double>& a, const std::vector<double>& b,
                                   MatrixOp op, double z, std::mt19937_64& rng) {
    int n = static_cast<int>(a.size());
    Eigen::MatrixXcd u = haar_unitary(n, rng);
    Eigen::VectorXcd da(n);
    for (int i = 0; i < n; ++i) da(i) = a[static_cast<std::size_t>(i)];
    switch (op.kind) {
        case MatrixOp::Kind::add: {
            Eigen::VectorXcd db(n);
            for (int i = 0; i < n; ++i) db(i) = b[static_cast<std::size_t>(i)];
            Eigen::MatrixXcd m = da.asDiagonal();
            m.noalias() += u * db.asDiagonal() * u.adjoint();
            Eigen::MatrixXcd shifted = z * Eigen::MatrixXcd::Identity(n, n) - m;
            return static_cast<long double>(shifted.determinant().real());
        }
        case MatrixOp::Kind::mul: {
            Eigen::VectorXcd db(n);
            for (int i = 0; i < n; ++i) db(i) = b[static_cast<std::size_t>(i)];
            // no symmetrization: the expectation is already the convolution
            Eigen::MatrixXcd m = da.asDiagonal() * (u * db.asDiagonal() * u.adjoint());
            Eigen::MatrixXcd shifted = z * Eigen::MatrixXcd::Identity(n, n) - m;
            return static_cast<long double>(shifted.determinant().real());
        }
        case MatrixOp::Kind::minor: {
            Eigen::MatrixXcd rotated = u * da.asDiagonal() * u.adjoint();
            Eigen::MatrixXcd corner = rotated.topLeftCorner(op.k, op.k);
            Eigen::MatrixXcd shifted = z * Eigen::MatrixXcd::Identity(op.k, op.k) - corner;
            return static_cast<long double>(shifted.determinant().real());
        }
    }
    throw domain_error("unknown matrix operation");
}

}  // namespace detail

/// Monte-Carlo estimate of E[det(z - model)] over Haar rotations, where the
/// model is diag(a) + U diag(b) U*, diag(a) U diag(b) U*, or the top-left
/// k-corner of U diag(a) U*.
///
/// The sample budget is cut into fixed 256-sample chunks with seeds derived
/// from (seed, chunk index) and merged in chunk order, so the estimate is
/// byte-identical for every thread count.
inline McEstimate mc_quadrature(const std::vector<double>& a, const std::vector<double>& b,
                                MatrixOp op, double z, std::uint64_t samples, std::uint64_t seed,
                                unsigned threads = 1) {
    require(!a.empty() && a.size() <= 64, "root list length must be in [1, 64]");
    if (op.kind == MatrixOp::Kind::minor) {
        require(op.k >= 1 && static_cast<std::size_t>(op.k) <= a.size(),
                "minor size must be in [1, N]");
    } else {
        require(a.size() == b.size(), "root lists must have equal length");
    }
    require(samples >= 100, "at least 100 samples required");
    require(threads >= 1, "thread count must be positive");

    auto total = detail::run_chunked(samples, seed, threads, [&](std::mt19937_64& rng) {
        return detail::mc_sample_value(a, b, op, z, rng);
    });
    return detail::to_estimate(total, seed);
}

/// Multivariate unitary model: diag(l_0) combined with U_j diag(l_j) U_j*
/// over independent Haar rotations, by matrix sum or product in list order.
/// Same chunked sampling as the two-list form; for two lists the estimates
/// coincide sample for sample.
inline McEstimate mc_quadrature(const std::vector<std::vector<double>>& lists, BinaryOp op,
                                double z, std::uint64_t samples, std::uint64_t seed,
                                unsigned threads = 1) {
    require(lists.size() >= 2 && lists.size() <= 8, "need 2 to 8 root lists");
    std::size_t n = lists[0].size();
    require(n >= 1 && n <= 64, "root list length must be in [1, 64]");
    for (const auto& l : lists) require(l.size() == n, "all root lists must share one length");
    require(samples >= 100, "at least 100 samples required");
    require(threads >= 1, "thread count must be positive");
    int ni = static_cast<int>(n);

    auto total = detail::run_chunked(samples, seed, threads, [&](std::mt19937_64& rng) {
        Eigen::VectorXcd diag(ni);
        for (int i = 0; i < ni; ++i) diag(i) = lists[0][static_cast<std::size_t>(i)];
        Eigen::MatrixXcd m = diag.asDiagonal();
        for (std::size_t j = 1; j < lists.size(); ++j) {
            Eigen::MatrixXcd u = haar_unitary(ni, rng);
            for (int i = 0; i < ni; ++i) diag(i) = lists[j][static_cast<std::size_t>(i)];
            Eigen::MatrixXcd rotated = u * diag.asDiagonal() * u.adjoint();
            if (op == BinaryOp::add)
                m += rotated;
            else
                m = m * rotated;
        }
        Eigen::MatrixXcd shifted = z * Eigen::MatrixXcd::Identity(ni, ni) - m;
        return static_cast<long double>(shifted.determinant().real());
    });
    return detail::to_estimate(total, seed);
}

}  // namespace freeprob
