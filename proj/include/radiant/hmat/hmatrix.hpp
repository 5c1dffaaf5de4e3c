#pragma once

#include "radiant/hmat/aca.hpp"
#include "radiant/hmat/cluster_tree.hpp"
#include "radiant/parallel.hpp"

#include <memory>
#include <span>
#include <type_traits>
#include <ostream>
#include <string>

namespace radiant::hmat {

struct Options {
    double eta    = 10.0;  // admissibility: max(R1, R2) < eta * |c1 - c2|
    double eps    = 1e-3;  // ACA relative tolerance
    int threads   = 0;     // 0 = default worker count
};

struct CompressionStats {
    Index rows = 0, cols = 0;
    Index stored_entries    = 0;
    Index dense_equivalent  = 0;
    double ratio            = 1.0;
    Index dense_leaves      = 0;
    Index low_rank_leaves   = 0;
    Index rejected_low_rank = 0; // admissible leaves stored dense after ACA gave up
    Index max_rank          = 0;
    std::vector<Index> ranks; // one per low-rank leaf
};

inline bool admissible(const Cluster &a, const Cluster &b, double eta) {
    return std::max(a.radius, b.radius) < eta * (a.center - b.center).norm();
}

/// Kernels that can evaluate a whole block faster than entry by entry.
template <class K>
concept BlockKernel = requires(const K &k, std::span<const Index> r, Eigen::MatrixXd &out) { k.block(r, r, out); };

/// Hierarchical matrix over a pair of cluster trees. Entries are requested
/// through kernel(i, j) with original (unpermuted) indices, or through
/// kernel.block(rows, cols, out) when the kernel provides it.
template <class Scalar = double>
class HMatrix {
  public:
    struct Leaf {
        Index row_begin, row_end, col_begin, col_end; // tree order
        bool low_rank   = false;
        bool admissible = false;
        Matrix<Scalar> dense;
        LowRank<Scalar> factors;

        Index rows() const { return row_end - row_begin; }
        Index cols() const { return col_end - col_begin; }
        Index stored() const { return low_rank ? factors.rank() * (rows() + cols()) : rows() * cols(); }
    };

    template <class Kernel>
    HMatrix(std::shared_ptr<const ClusterTree> rows, std::shared_ptr<const ClusterTree> cols, Kernel &&kernel,
            const Options &options = {})
        : m_rows(std::move(rows)), m_cols(std::move(cols)), m_options(options) {
        if (!(options.eps > 0.0) || !(options.eta >= 0.0))
            throw Error("hmatrix: need eps > 0 and eta >= 0");
        partition(0, 0);
        const ClusterTree &rt = *m_rows, &ct = *m_cols;
        parallel_for(
            static_cast<std::ptrdiff_t>(m_leaves.size()),
            [&](std::ptrdiff_t l, int) {
                Leaf &leaf = m_leaves[static_cast<std::size_t>(l)];
                std::vector<Index> row_ids(static_cast<std::size_t>(leaf.rows())),
                    col_ids(static_cast<std::size_t>(leaf.cols()));
                for (Index i = 0; i < leaf.rows(); ++i)
                    row_ids[static_cast<std::size_t>(i)] = rt.original(leaf.row_begin + i);
                for (Index j = 0; j < leaf.cols(); ++j)
                    col_ids[static_cast<std::size_t>(j)] = ct.original(leaf.col_begin + j);
                auto entry = [&](Index i, Index j) {
                    return static_cast<Scalar>(kernel(row_ids[static_cast<std::size_t>(i)], col_ids[static_cast<std::size_t>(j)]));
                };
                auto fill = [&](std::span<const Index> r, Matrix<Scalar> &out) {
                    if constexpr (BlockKernel<std::remove_cvref_t<Kernel>>) {
                        Eigen::MatrixXd tmp;
                        kernel.block(r, col_ids, tmp);
                        out = tmp.template cast<Scalar>();
                    } else {
                        out.resize(static_cast<Index>(r.size()), leaf.cols());
                        for (Index j = 0; j < leaf.cols(); ++j)
                            for (std::size_t i = 0; i < r.size(); ++i)
                                out(static_cast<Index>(i), j) = static_cast<Scalar>(kernel(r[i], col_ids[static_cast<std::size_t>(j)]));
                    }
                };
                auto fetch_row = [&](Index i, Vector<Scalar> &out) {
                    Matrix<Scalar> one;
                    fill(std::span<const Index>(&row_ids[static_cast<std::size_t>(i)], 1), one);
                    out = one.row(0).transpose();
                };
                try {
                    if (leaf.low_rank) {
                        const Index max_rank = std::min(leaf.rows(), leaf.cols()) / 2;
                        auto lr = aca<Scalar>(leaf.rows(), leaf.cols(), entry, fetch_row, m_options.eps, max_rank);
                        if (lr) {
                            leaf.factors = std::move(*lr);
                            return;
                        }
                        leaf.low_rank = false;
                    }
                    fill(row_ids, leaf.dense);
                } catch (const std::exception &e) {
                    throw Error("kernel evaluation failed in block rows [" + std::to_string(leaf.row_begin) + ", " +
                                std::to_string(leaf.row_end) + ") cols [" + std::to_string(leaf.col_begin) + ", " +
                                std::to_string(leaf.col_end) + ") (tree order): " + e.what());
                }
            },
            m_options.threads);
    }

    Index rows() const { return m_rows->size(); }
    Index cols() const { return m_cols->size(); }
    const std::vector<Leaf> &leaves() const { return m_leaves; }
    const Options &options() const { return m_options; }
    const ClusterTree &row_tree() const { return *m_rows; }
    const ClusterTree &col_tree() const { return *m_cols; }

    /// y = H x in original ordering. Each worker accumulates its own leaves;
    /// the partial sums are added in worker order, so for a fixed worker
    /// count the result is bitwise reproducible.
    Vector<Scalar> matvec(const Vector<Scalar> &x, int threads = 0) const {
        if (x.size() != cols())
            throw Error("hmatrix matvec: vector has " + std::to_string(x.size()) + " entries, expected " +
                        std::to_string(cols()));
        Vector<Scalar> xp(cols());
        for (Index k = 0; k < cols(); ++k)
            xp(k) = x(m_cols->original(k));

        if (threads <= 0)
            threads = m_options.threads > 0 ? m_options.threads : num_threads();
        threads = static_cast<int>(std::max<std::ptrdiff_t>(1, std::min<std::ptrdiff_t>(threads, m_leaves.size())));
        std::vector<Vector<Scalar>> partial(static_cast<std::size_t>(threads), Vector<Scalar>::Zero(rows()));
        parallel_for(
            threads,
            [&](std::ptrdiff_t w, int) {
                auto &y = partial[static_cast<std::size_t>(w)];
                for (std::size_t l = static_cast<std::size_t>(w); l < m_leaves.size(); l += static_cast<std::size_t>(threads)) {
                    const Leaf &leaf = m_leaves[l];
                    auto xs          = xp.segment(leaf.col_begin, leaf.cols());
                    auto ys          = y.segment(leaf.row_begin, leaf.rows());
                    if (leaf.low_rank) {
                        if (leaf.factors.rank() > 0)
                            ys.noalias() += leaf.factors.U * (leaf.factors.V * xs);
                    } else {
                        ys.noalias() += leaf.dense * xs;
                    }
                }
            },
            threads);
        Vector<Scalar> yp = std::move(partial.front());
        for (std::size_t w = 1; w < partial.size(); ++w)
            yp += partial[w];
        Vector<Scalar> y(rows());
        for (Index k = 0; k < rows(); ++k)
            y(m_rows->original(k)) = yp(k);
        return y;
    }

    /// Dense reconstruction in original ordering (small sizes only).
    Matrix<Scalar> to_dense() const {
        Matrix<Scalar> tree = Matrix<Scalar>::Zero(rows(), cols());
        for (const auto &leaf : m_leaves)
            tree.block(leaf.row_begin, leaf.col_begin, leaf.rows(), leaf.cols()) =
                leaf.low_rank ? leaf.factors.dense() : leaf.dense;
        Matrix<Scalar> out(rows(), cols());
        for (Index j = 0; j < cols(); ++j)
            for (Index i = 0; i < rows(); ++i)
                out(m_rows->original(i), m_cols->original(j)) = tree(i, j);
        return out;
    }

    CompressionStats stats() const {
        CompressionStats s;
        s.rows             = rows();
        s.cols             = cols();
        s.dense_equivalent = rows() * cols();
        for (const auto &leaf : m_leaves) {
            s.stored_entries += leaf.stored();
            if (leaf.low_rank) {
                ++s.low_rank_leaves;
                s.ranks.push_back(leaf.factors.rank());
                s.max_rank = std::max(s.max_rank, leaf.factors.rank());
            } else {
                ++s.dense_leaves;
                s.rejected_low_rank += leaf.admissible;
            }
        }
        s.ratio = s.stored_entries > 0 ? static_cast<double>(s.dense_equivalent) / static_cast<double>(s.stored_entries)
                                       : 0.0;
        return s;
    }

    /// One line per leaf: row_begin,row_end,col_begin,col_end,type,rank.
    void write_blocks_csv(std::ostream &out) const {
        out << "row_begin,row_end,col_begin,col_end,type,rank\n";
        for (const auto &leaf : m_leaves)
            out << leaf.row_begin << ',' << leaf.row_end << ',' << leaf.col_begin << ',' << leaf.col_end << ','
                << (leaf.low_rank ? "lowrank" : "dense") << ',' << (leaf.low_rank ? leaf.factors.rank() : 0) << '\n';
    }

  private:
    std::shared_ptr<const ClusterTree> m_rows, m_cols;
    Options m_options;
    std::vector<Leaf> m_leaves;

    void partition(int r, int c) {
        const Cluster &a = m_rows->cluster(r), &b = m_cols->cluster(c);
        if (admissible(a, b, m_options.eta)) {
            m_leaves.push_back({a.begin, a.end, b.begin, b.end, true, true, {}, {}});
            return;
        }
        if (a.is_leaf() && b.is_leaf()) {
            m_leaves.push_back({a.begin, a.end, b.begin, b.end, false, false, {}, {}});
            return;
        }
        if (a.is_leaf()) {
            partition(r, b.left);
            partition(r, b.right);
        } else if (b.is_leaf()) {
            partition(a.left, c);
            partition(a.right, c);
        } else {
            partition(a.left, b.left);
            partition(a.left, b.right);
            partition(a.right, b.left);
            partition(a.right, b.right);
        }
    }
};

} // namespace radiant::hmat
