#pragma once

#include <vector>

#include "qconv/errors.hpp"
#include "qconv/kernels.hpp"

namespace qconv {

// Real-valued function on S x A, stored row-major (one contiguous row per
// state). Norms are the sup norm ||f||_W = max |f| over all cells.
struct QTable {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> v;

    QTable() = default;
    QTable(int ns, int na, double fill = 0.0)
        : n_states(ns), n_actions(na),
          v(static_cast<std::size_t>(ns) * static_cast<std::size_t>(na), fill) {}

    double& at(int s, int a) {
        return v[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                 static_cast<std::size_t>(a)];
    }
    double at(int s, int a) const {
        return v[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                 static_cast<std::size_t>(a)];
    }

    bool same_shape(const QTable& o) const {
        return n_states == o.n_states && n_actions == o.n_actions;
    }

    double sup_norm() const { return kern::active_ops().max_abs(v.data(), v.size()); }

    double sup_dist(const QTable& o) const {
        if (!same_shape(o)) throw DimensionMismatch("QTable shapes differ");
        return kern::active_ops().max_abs_diff(v.data(), o.v.data(), v.size());
    }

    // max_{x,y} |q(x) - q(y)| = max - min.
    double range() const {
        auto mm = kern::active_ops().min_max(v.data(), v.size());
        return mm.hi - mm.lo;
    }

    double max_row(int s) const {
        const double* row = v.data() +
            static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions);
        double m = row[0];
        for (int a = 1; a < n_actions; ++a) m = m < row[a] ? row[a] : m;
        return m;
    }

    // Ties broken toward the lowest action index.
    int argmax_row(int s) const {
        const double* row = v.data() +
            static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions);
        int best = 0;
        for (int a = 1; a < n_actions; ++a)
            if (row[a] > row[best]) best = a;
        return best;
    }
};

struct PolicyTable {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> probs; // row-major, rows sum to 1

    PolicyTable() = default;
    PolicyTable(int ns, int na)
        : n_states(ns), n_actions(na),
          probs(static_cast<std::size_t>(ns) * static_cast<std::size_t>(na), 0.0) {}

    double& at(int s, int a) {
        return probs[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                     static_cast<std::size_t>(a)];
    }
    double at(int s, int a) const {
        return probs[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                     static_cast<std::size_t>(a)];
    }
};

} // namespace qconv
