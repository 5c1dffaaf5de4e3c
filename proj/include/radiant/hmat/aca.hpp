#pragma once

#include "radiant/common.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace radiant::hmat {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A ~= U * V with U: m x r, V: r x n.
template <class Scalar>
struct LowRank {
    Matrix<Scalar> U;
    Matrix<Scalar> V;

    Index rank() const { return U.cols(); }
    Index rows() const { return U.rows(); }
    Index cols() const { return V.cols(); }
    Matrix<Scalar> dense() const { return U * V; }
};

/// Partially pivoted adaptive cross approximation of the m x n block whose
/// entries are entry(i, j). Stops when |u_r||v_r| <= eps |S_r|_F, with the
/// Frobenius norm of the approximant S_r updated by recurrence, and the
/// residual of a few sampled unused rows confirms the estimate; otherwise
/// the worst sampled row becomes the next pivot. Returns nullopt once the
/// rank would exceed max_rank.
/// `fetch_row(i, out)` fills row i of the block into `out` (size n).
template <class Scalar, class Entry, class Row>
std::optional<LowRank<Scalar>> aca(Index m, Index n, Entry &&entry, Row &&fetch_row, double eps, Index max_rank,
                                   Index sample_rows = 8) {
    using Real = typename Eigen::NumTraits<Scalar>::Real;
    std::vector<Vector<Scalar>> us, vs;
    std::vector<char> row_used(static_cast<std::size_t>(m), 0);
    double norm2     = 0.0;
    double max_entry = 0.0;
    auto negligible  = [&](Real value) {
        return value == Real(0) || static_cast<double>(value) <= 1e-14 * max_entry;
    };

    // Start from the row holding the largest entry of the first column.
    Index pivot_row = 0;
    {
        Real best = -1;
        for (Index i = 0; i < m; ++i) {
            const Real a = std::abs(entry(i, Index{0}));
            max_entry    = std::max(max_entry, static_cast<double>(a));
            if (a > best) {
                best      = a;
                pivot_row = i;
            }
        }
    }

    Index unused_rows = m;
    while (unused_rows > 0) {
        row_used[static_cast<std::size_t>(pivot_row)] = 1;
        --unused_rows;

        Vector<Scalar> row(n);
        fetch_row(pivot_row, row);
        max_entry = std::max(max_entry, static_cast<double>(row.cwiseAbs().maxCoeff()));
        for (std::size_t k = 0; k < us.size(); ++k)
            row -= us[k](pivot_row) * vs[k];

        Index pivot_col = 0;
        const Real pivot_abs = row.cwiseAbs().maxCoeff(&pivot_col);
        if (negligible(pivot_abs)) {
            // Zero residual row: move to the next unused row.
            Index next = -1;
            for (Index i = 0; i < m && next < 0; ++i)
                if (!row_used[static_cast<std::size_t>((pivot_row + 1 + i) % m)])
                    next = (pivot_row + 1 + i) % m;
            if (next < 0)
                break;
            pivot_row = next;
            continue;
        }
        if (static_cast<Index>(us.size()) >= max_rank)
            return std::nullopt;

        Vector<Scalar> v = row / row(pivot_col);
        Vector<Scalar> u(m);
        for (Index i = 0; i < m; ++i)
            u(i) = entry(i, pivot_col);
        for (std::size_t k = 0; k < us.size(); ++k)
            u -= vs[k](pivot_col) * us[k];

        const double unorm = static_cast<double>(u.norm()), vnorm = static_cast<double>(v.norm());
        double cross       = 0.0;
        for (std::size_t k = 0; k < us.size(); ++k)
            cross += static_cast<double>(std::real(us[k].dot(u) * vs[k].dot(v)));
        norm2 += 2.0 * cross + unorm * unorm * vnorm * vnorm;
        us.push_back(std::move(u));
        vs.push_back(std::move(v));

        Index next = -1;
        if (unorm * vnorm <= eps * std::sqrt(std::max(norm2, 0.0))) {
            // Residual of evenly spread unused rows, scaled to the whole block.
            const Index samples = std::min<Index>(sample_rows, unused_rows);
            if (samples == 0)
                break;
            double sampled2 = 0.0, worst = -1.0;
            Index seen = 0, stride = std::max<Index>(1, unused_rows / samples);
            for (Index i = (static_cast<Index>(us.size()) * 7919) % m, visited = 0, k = 0; visited < m && seen < samples;
                 i = (i + 1) % m, ++visited) {
                if (row_used[static_cast<std::size_t>(i)] || k++ % stride != 0)
                    continue;
                ++seen;
                Vector<Scalar> residual(n);
                fetch_row(i, residual);
                for (std::size_t q = 0; q < us.size(); ++q)
                    residual -= us[q](i) * vs[q];
                const double r2 = static_cast<double>(residual.squaredNorm());
                sampled2 += r2;
                if (r2 > worst) {
                    worst = r2;
                    next  = i;
                }
            }
            const double estimate = std::sqrt(sampled2 * static_cast<double>(unused_rows) / static_cast<double>(seen));
            if (estimate <= eps * std::sqrt(std::max(norm2, 0.0)))
                break;
        } else {
            // Next pivot row: largest entry of the new column among unused rows.
            Real best        = -1;
            const auto &last = us.back();
            for (Index i = 0; i < m; ++i)
                if (!row_used[static_cast<std::size_t>(i)] && std::abs(last(i)) > best) {
                    best = std::abs(last(i));
                    next = i;
                }
        }
        if (next < 0)
            break;
        pivot_row = next;
    }

    LowRank<Scalar> lr;
    const Index r = static_cast<Index>(us.size());
    lr.U.resize(m, r);
    lr.V.resize(r, n);
    for (Index k = 0; k < r; ++k) {
        lr.U.col(k) = us[static_cast<std::size_t>(k)];
        lr.V.row(k) = vs[static_cast<std::size_t>(k)].transpose();
    }
    return lr;
}

template <class Scalar, class Entry>
std::optional<LowRank<Scalar>> aca(Index m, Index n, Entry &&entry, double eps, Index max_rank, Index sample_rows = 8) {
    auto fetch_row = [&](Index i, Vector<Scalar> &out) {
        for (Index j = 0; j < n; ++j)
            out(j) = entry(i, j);
    };
    return aca<Scalar>(m, n, entry, fetch_row, eps, max_rank, sample_rows);
}

} // namespace radiant::hmat
