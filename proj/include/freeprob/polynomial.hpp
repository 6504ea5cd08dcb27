#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "freeprob/common.hpp"
#include "freeprob/measure.hpp"

namespace freeprob {

/// Monic real polynomial stored by ascending-power coefficients
/// c[0] + c[1] z + ... + c[N-1] z^{N-1} + z^N, with c.back() == 1.
struct MonicPoly {
    std::vector<double> coeffs;

    explicit MonicPoly(std::vector<double> c) : coeffs(std::move(c)) {
        require(!coeffs.empty(), "polynomial needs at least the leading coefficient");
        for (double v : coeffs) require_finite(v, "coefficient");
        require(coeffs.back() == 1.0, "polynomial must be monic");
    }

    std::size_t degree() const { return coeffs.size() - 1; }

    double operator()(double z) const {
        long double acc = 0.0L;
        for (std::size_t k = coeffs.size(); k-- > 0;)
            acc = acc * static_cast<long double>(z) + coeffs[k];
        return static_cast<double>(acc);
    }

    /// Signed elementary-symmetric view: p(z) = sum_i (-1)^i a_i z^{N-i},
    /// so a_0 = 1 and a_i = (-1)^i c[N-i].
    double signed_coeff(std::size_t i) const {
        double c = coeffs[degree() - i];
        return i % 2 == 0 ? c : -c;
    }

    static MonicPoly from_signed_coeffs(const std::vector<double>& a) {
        std::size_t n = a.size() - 1;
        std::vector<double> c(n + 1);
        for (std::size_t i = 0; i <= n; ++i) c[n - i] = i % 2 == 0 ? a[i] : -a[i];
        MonicPoly p(std::move(c));
        return p;
    }

    static MonicPoly from_roots(const std::vector<double>& roots) {
        std::vector<long double> c{1.0L};
        for (double r : roots) {
            std::vector<long double> next(c.size() + 1, 0.0L);
            for (std::size_t k = 0; k < c.size(); ++k) {
                next[k + 1] += c[k];
                next[k] -= static_cast<long double>(r) * c[k];
            }
            c = std::move(next);
        }
        std::vector<double> out(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) out[k] = static_cast<double>(c[k]);
        return MonicPoly(std::move(out));
    }
};

namespace detail {

// Euclidean chains on degree-64 polynomials cancel far below long double
// resolution; quad precision keeps the chain members meaningful.
#if defined(__SIZEOF_FLOAT128__)
using qfloat = __float128;
#else
using qfloat = long double;
#endif

inline qfloat qabs(qfloat v) { return v < 0 ? -v : v; }

using QPoly = std::vector<qfloat>;  // ascending powers, may be non-monic

inline QPoly to_qpoly(const MonicPoly& p) {
    QPoly q(p.coeffs.size());
    for (std::size_t k = 0; k < p.coeffs.size(); ++k) q[k] = p.coeffs[k];
    return q;
}

inline qfloat eval(const QPoly& p, qfloat z) {
    qfloat acc = 0;
    for (std::size_t k = p.size(); k-- > 0;) acc = acc * z + p[k];
    return acc;
}

inline QPoly differentiate(const QPoly& p) {
    if (p.size() <= 1) return {qfloat(0)};
    QPoly d(p.size() - 1);
    for (std::size_t k = 1; k < p.size(); ++k) d[k - 1] = qfloat(k) * p[k];
    return d;
}

inline qfloat max_abs(const QPoly& p) {
    qfloat m = 0;
    for (qfloat v : p) m = std::max(m, qabs(v));
    return m;
}

inline void trim(QPoly& p, qfloat tol) {
    while (p.size() > 1 && qabs(p.back()) <= tol) p.pop_back();
}

// remainder of a / b
inline QPoly poly_rem(QPoly a, const QPoly& b) {
    while (a.size() >= b.size() && a.size() > 1) {
        qfloat f = a.back() / b.back();
        std::size_t off = a.size() - b.size();
        for (std::size_t k = 0; k < b.size(); ++k) a[off + k] -= f * b[k];
        a.pop_back();
        trim(a, 0);
        if (a.size() < b.size()) break;
    }
    return a;
}

// positive rescaling to unit max-coefficient; preserves signs everywhere
inline void normalize(QPoly& p) {
    qfloat m = max_abs(p);
    if (m > 0)
        for (auto& v : p) v /= m;
}

// Sturm chain of a square-free polynomial, members unit-normalized.
// Thresholds sit far below double-precision input noise but far above the
// quad-precision arithmetic floor.
inline std::vector<QPoly> sturm_chain(const QPoly& p) {
    std::vector<QPoly> chain{p, differentiate(p)};
    normalize(chain[0]);
    normalize(chain[1]);
    while (chain.back().size() > 1) {
        QPoly r = poly_rem(chain[chain.size() - 2], chain.back());
        qfloat m = max_abs(r);
        if (m <= qfloat(1e-25)) break;
        for (auto& v : r) v = -v / m;
        trim(r, qfloat(1e-25));
        chain.push_back(std::move(r));
    }
    return chain;
}

inline int sign_variations(const std::vector<QPoly>& chain, qfloat x) {
    int v = 0, prev = 0;
    for (const auto& p : chain) {
        qfloat val = eval(p, x);
        int s = val > 0 ? 1 : (val < 0 ? -1 : 0);
        if (s != 0) {
            if (prev != 0 && s != prev) ++v;
            prev = s;
        }
    }
    return v;
}

// number of distinct real roots in (a, b]
inline int sturm_count(const std::vector<QPoly>& chain, qfloat a, qfloat b) {
    return sign_variations(chain, a) - sign_variations(chain, b);
}

// quotient a / b assuming near-exact divisibility
inline QPoly poly_quot(QPoly a, const QPoly& b) {
    QPoly q(a.size() >= b.size() ? a.size() - b.size() + 1 : 1, qfloat(0));
    while (a.size() >= b.size() && a.size() > 1) {
        qfloat f = a.back() / b.back();
        q[a.size() - b.size()] = f;
        std::size_t off = a.size() - b.size();
        for (std::size_t k = 0; k < b.size(); ++k) a[off + k] -= f * b[k];
        a.pop_back();
        trim(a, 0);
        if (a.size() < b.size()) break;
    }
    return q;
}

// gcd(p, p') via Euclid. The termination and validation cutoffs are
// calibrated to double-precision inputs, where approximate repeated-root
// structure survives only at the 1e-12 scale.
inline QPoly repeated_part(const QPoly& p) {
    QPoly a = p, b = differentiate(p);
    normalize(a);
    normalize(b);
    while (b.size() > 1) {
        QPoly r = poly_rem(a, b);
        qfloat m = max_abs(r);
        if (m <= qfloat(1e-12)) {
            // candidate gcd; accept only if it genuinely divides p
            QPoly check = poly_rem(p, b);
            if (max_abs(check) <= qfloat(1e-9) * max_abs(p)) return b;
            return QPoly{qfloat(1)};
        }
        for (auto& v : r) v /= m;
        trim(r, qfloat(1e-15));
        a = std::move(b);
        b = std::move(r);
    }
    return QPoly{qfloat(1)};
}

// All real roots of a monic QPoly, ascending, repeated with multiplicity.
// Throws unless exactly degree-many real roots are found.
inline std::vector<double> real_roots_q(const QPoly& qp) {
    std::size_t n = qp.size() - 1;
    if (n == 0) return {};
    if (n == 1) return {static_cast<double>(-qp[0] / qp[1])};

    QPoly rep = repeated_part(qp);
    QPoly sf = rep.size() > 1 ? poly_quot(qp, rep) : qp;

    auto chain = sturm_chain(sf);
    // Lagrange bound on the square-free part: 2 max_k |c_{n-k}/lead|^{1/k}
    double lead = static_cast<double>(qabs(sf.back()));
    double bound_d = 0.0;
    for (std::size_t k = 1; k < sf.size(); ++k) {
        double c = static_cast<double>(qabs(sf[sf.size() - 1 - k]));
        if (c > 0.0)
            bound_d = std::max(bound_d, std::pow(c / lead, 1.0 / static_cast<double>(k)));
    }
    qfloat bound = qfloat(2.0 * bound_d + 1.0);

    struct Interval {
        qfloat a, b;
        int count;
    };
    std::vector<Interval> work{{-bound, bound, sturm_count(chain, -bound, bound)}};
    QPoly dsf = differentiate(sf);
    std::vector<qfloat> distinct;
    while (!work.empty()) {
        auto iv = work.back();
        work.pop_back();
        if (iv.count == 0) continue;
        if (iv.count == 1 || iv.b - iv.a < qfloat(1e-14) * bound) {
            // bisection on the square-free part, which changes sign here
            qfloat a = iv.a, b = iv.b;
            qfloat fa = eval(sf, a);
            for (int k = 0; k < 200 && b - a > qfloat(1e-20) * bound; ++k) {
                qfloat m = (a + b) / 2;
                qfloat fm = eval(sf, m);
                if ((fa <= 0) == (fm <= 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            qfloat r = (a + b) / 2;
            for (int k = 0; k < 6; ++k) {
                qfloat f = eval(sf, r), d = eval(dsf, r);
                if (d == 0) break;
                qfloat next = r - f / d;
                if (next < iv.a || next > iv.b) break;
                r = next;
            }
            distinct.push_back(r);
            continue;
        }
        qfloat m = (iv.a + iv.b) / 2;
        int left = sturm_count(chain, iv.a, m);
        work.push_back({iv.a, m, left});
        work.push_back({m, iv.b, iv.count - left});
    }
    std::sort(distinct.begin(), distinct.end());

    // multiplicity = 1 + multiplicity inside the repeated part, recursively
    std::vector<double> roots;
    if (rep.size() > 1) {
        QPoly repm = rep;
        qfloat rlead = repm.back();
        for (auto& v : repm) v /= rlead;
        auto inner = real_roots_q(repm);
        for (qfloat r : distinct) {
            double rd = static_cast<double>(r);
            std::size_t mult = 1;
            for (double ir : inner)
                if (std::abs(ir - rd) <= 1e-7 * std::max(1.0, std::abs(ir))) ++mult;
            for (std::size_t k = 0; k < mult; ++k) roots.push_back(rd);
        }
    } else {
        for (qfloat r : distinct) roots.push_back(static_cast<double>(r));
    }

    if (roots.size() != n)
        throw convergence_error("root extraction found " + std::to_string(roots.size()) +
                                " real roots for degree " + std::to_string(n) +
                                "; polynomial may not be real-rooted");
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace detail

/// All real roots of a real-rooted monic polynomial, ascending, repeated
/// with multiplicity. Distinct roots are isolated by Sturm counts on the
/// square-free part inside a Lagrange root bound, then polished by bisection
/// and Newton steps; multiplicities come from the repeated-part factor.
inline std::vector<double> real_roots(const MonicPoly& p) {
    return detail::real_roots_q(detail::to_qpoly(p));
}

/// Empirical root distribution: weight 1/N per root (coincident roots merge).
inline DiscreteMeasure measure_of(const MonicPoly& p) {
    auto roots = real_roots(p);
    require(!roots.empty(), "constant polynomial carries no measure");
    return make_uniform_measure(roots);
}

}  // namespace freeprob
