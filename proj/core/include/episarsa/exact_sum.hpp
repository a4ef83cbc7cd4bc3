#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace episarsa {

// Error-free accumulation of doubles (Shewchuk-style expansions).
//
// An accumulator holds the running sum as a list of non-overlapping partials
// whose exact sum equals the exact sum of everything added so far. Adding the
// exact product a*b feeds both halves of the two-product split, so the final
// rounded value is independent of the order terms were added in. The trainer
// relies on this: the trajectory-order TD sum and its transition-count
// rewrite must agree bit for bit.

namespace detail {

inline void two_sum(double a, double b, double& s, double& err) {
    s = a + b;
    const double bv = s - a;
    err = (a - (s - bv)) + (b - bv);
}

inline void two_prod(double a, double b, double& p, double& err) {
    p = a * b;
    err = std::fma(a, b, -p);
}

// requires |a| >= |b|
inline void fast_two_sum(double a, double b, double& s, double& err) {
    s = a + b;
    err = b - (s - a);
}

} // namespace detail

class ExactScalarSum {
public:
    /// Add a plain double.
    void add(double b) {
        if (b == 0.0) return;
        std::size_t kept = 0;
        for (double partial : partials_) {
            double s, err;
            detail::two_sum(partial, b, s, err);
            if (err != 0.0) partials_[kept++] = err;
            b = s;
        }
        partials_.resize(kept);
        partials_.push_back(b);
    }

    /// Add the exact value a*b.
    void add_product(double a, double b) {
        double p, err;
        detail::two_prod(a, b, p, err);
        add(err);
        add(p);
    }

    /// Add the exact value count*a*b, count an integer representable in double.
    void add_product(double count, double a, double b) {
        double p, perr;
        detail::two_prod(a, b, p, perr);
        double q, qerr;
        detail::two_prod(count, p, q, qerr);
        double w, werr;
        detail::two_prod(count, perr, w, werr);
        add(werr);
        add(w);
        add(qerr);
        add(q);
    }

    /// Correctly rounded value of the exact sum. Runs Shewchuk's COMPRESS so
    /// the result depends only on the exact sum, not on the partial layout.
    double value() const {
        if (partials_.empty()) return 0.0;
        std::vector<double> g(partials_);
        const std::size_t m = g.size();
        double q = g[m - 1];
        std::size_t bottom = m - 1;
        for (std::size_t i = m - 1; i-- > 0;) {
            double s, err;
            detail::fast_two_sum(q, g[i], s, err);
            if (err != 0.0) {
                g[bottom] = s;
                --bottom;
                q = err;
            } else {
                q = s;
            }
        }
        g[bottom] = q;
        q = g[bottom];
        for (std::size_t i = bottom + 1; i < m; ++i) {
            double s, err;
            detail::fast_two_sum(g[i], q, s, err);
            q = s;
        }
        return q;
    }

private:
    std::vector<double> partials_; // non-overlapping, increasing magnitude
};

/// Component-wise exact accumulator for d-vectors.
class ExactVectorSum {
public:
    explicit ExactVectorSum(Eigen::Index dim) : comps_(static_cast<std::size_t>(dim)) {}

    void add_product(Eigen::Index i, double a, double b) {
        comps_[static_cast<std::size_t>(i)].add_product(a, b);
    }

    void add_product(Eigen::Index i, double count, double a, double b) {
        comps_[static_cast<std::size_t>(i)].add_product(count, a, b);
    }

    Eigen::VectorXd rounded() const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(comps_.size()));
        for (std::size_t i = 0; i < comps_.size(); ++i)
            out[static_cast<Eigen::Index>(i)] = comps_[i].value();
        return out;
    }

private:
    std::vector<ExactScalarSum> comps_;
};

} // namespace episarsa
