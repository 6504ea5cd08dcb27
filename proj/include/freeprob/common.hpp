#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace freeprob {

// Thrown when an argument leaves the mathematical domain of an operation
// (evaluation point inside the support, nonpositive weight, tau out of
// range, ...). The CLI maps this to exit code 2.
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an iterative solver fails to reach its tolerance within its
// iteration budget. The CLI maps this to exit code 3.
class convergence_error : public std::runtime_error {
public:
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw domain_error(what);
}

inline void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw domain_error(what + ": non-finite value");
}

// Compensated (Neumaier) summation. Several accuracy targets in the test
// suite sit near 1e-12 after thousands of terms, so plain accumulation in
// the hot reductions is not good enough.
class NeumaierSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double neumaier_total(const std::vector<double>& xs) {
    NeumaierSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

}  // namespace freeprob
