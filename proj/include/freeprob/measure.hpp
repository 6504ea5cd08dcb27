#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "freeprob/common.hpp"

namespace freeprob {

/// Compactly supported probability measure with finitely many atoms.
///
/// Atoms are kept strictly increasing; construction sorts, merges atoms
/// closer than 1e-12 in relative distance, and normalizes the weights to
/// total mass 1. Instances are immutable after construction and safe to
/// share across threads.
class DiscreteMeasure {
public:
    DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights) {
        require(!atoms.empty(), "measure needs at least one atom");
        require(atoms.size() == weights.size(), "atoms and weights must have equal length");
        for (double a : atoms) require_finite(a, "atom");
        for (double w : weights) {
            require_finite(w, "weight");
            require(w > 0.0, "weights must be positive");
        }

        std::vector<std::size_t> order(atoms.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return atoms[i] < atoms[j]; });

        for (std::size_t k : order) {
            double x = atoms[k], w = weights[k];
            if (!atoms_.empty() && coincident(atoms_.back(), x)) {
                weights_.back() += w;
            } else {
                atoms_.push_back(x);
                weights_.push_back(w);
            }
        }

        double total = neumaier_total(weights_);
        for (double& w : weights_) w /= total;
    }

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return atoms_.size(); }

    double support_min() const { return atoms_.front(); }
    double support_max() const { return atoms_.back(); }

    /// Left-continuous generalized inverse of the CDF: T(t) = x_k on
    /// (c_{k-1}, c_k], where c_k are the cumulative weights.
    double quantile(double t) const {
        require(t > 0.0 && t <= 1.0, "quantile argument must lie in (0,1]");
        double c = 0.0;
        for (std::size_t i = 0; i + 1 < atoms_.size(); ++i) {
            c += weights_[i];
            if (t <= c + 1e-15) return atoms_[i];
        }
        return atoms_.back();
    }

    double cdf(double x) const {
        NeumaierSum s;
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if (atoms_[i] <= x) s.add(weights_[i]);
        return s.value();
    }

    double moment(unsigned k) const {
        NeumaierSum s;
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            s.add(weights_[i] * std::pow(atoms_[i], static_cast<double>(k)));
        return s.value();
    }

    double mean() const { return moment(1); }

private:
    static bool coincident(double a, double b) {
        double scale = std::max({std::abs(a), std::abs(b), 1.0});
        return std::abs(a - b) <= 1e-12 * scale;
    }

    std::vector<double> atoms_;
    std::vector<double> weights_;
};

inline DiscreteMeasure make_measure(std::vector<double> atoms, std::vector<double> weights) {
    return DiscreteMeasure(std::move(atoms), std::move(weights));
}

inline DiscreteMeasure make_uniform_measure(std::vector<double> atoms) {
    std::vector<double> w(atoms.size(), 1.0);
    return DiscreteMeasure(std::move(atoms), std::move(w));
}

inline DiscreteMeasure point_mass(double x) { return DiscreteMeasure({x}, {1.0}); }

enum class BinaryOp { add, mul };

inline double apply_op(BinaryOp op, double x, double y) {
    return op == BinaryOp::add ? x + y : x * y;
}

/// Law of X op Y for independent X ~ m, Y ~ n.
inline DiscreteMeasure classical_convolve(const DiscreteMeasure& m, const DiscreteMeasure& n,
                                          BinaryOp op) {
    std::vector<double> atoms, weights;
    atoms.reserve(m.size() * n.size());
    weights.reserve(m.size() * n.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < n.size(); ++j) {
            atoms.push_back(apply_op(op, m.atoms()[i], n.atoms()[j]));
            weights.push_back(m.weights()[i] * n.weights()[j]);
        }
    return DiscreteMeasure(std::move(atoms), std::move(weights));
}

/// Integral of log(z - x) against the measure. Requires z strictly above
/// the support.
inline double log_potential(const DiscreteMeasure& m, double z) {
    require(z > m.support_max(), "log potential needs z above the support");
    NeumaierSum s;
    for (std::size_t i = 0; i < m.size(); ++i)
        s.add(m.weights()[i] * std::log(z - m.atoms()[i]));
    return s.value();
}

/// Integral of log|z - x|, defined for any z off the atoms.
inline double signed_log_potential(const DiscreteMeasure& m, double z) {
    NeumaierSum s;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double gap = std::abs(z - m.atoms()[i]);
        require(gap > 0.0, "signed log potential undefined on an atom");
        s.add(m.weights()[i] * std::log(gap));
    }
    return s.value();
}

/// Pushforward under x -> lambda * x.
inline DiscreteMeasure scale_pushforward(const DiscreteMeasure& m, double lambda) {
    require(lambda != 0.0, "scale factor must be nonzero");
    std::vector<double> atoms(m.atoms());
    for (double& a : atoms) a *= lambda;
    return DiscreteMeasure(std::move(atoms), std::vector<double>(m.weights()));
}

/// Pushforward under x -> x + c.
inline DiscreteMeasure shift_pushforward(const DiscreteMeasure& m, double c) {
    std::vector<double> atoms(m.atoms());
    for (double& a : atoms) a += c;
    return DiscreteMeasure(std::move(atoms), std::vector<double>(m.weights()));
}

/// L1 distance between quantile functions, integrated exactly over the
/// piecewise-constant pieces.
inline double wasserstein1(const DiscreteMeasure& m, const DiscreteMeasure& n) {
    std::vector<double> cuts{0.0, 1.0};
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < m.size(); ++i) cuts.push_back(c += m.weights()[i]);
    c = 0.0;
    for (std::size_t i = 0; i + 1 < n.size(); ++i) cuts.push_back(c += n.weights()[i]);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    NeumaierSum s;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double lo = cuts[k], hi = cuts[k + 1];
        if (hi <= lo) continue;
        double t = 0.5 * (lo + hi);
        s.add((hi - lo) * std::abs(m.quantile(t) - n.quantile(t)));
    }
    return s.value();
}

}  // namespace freeprob
