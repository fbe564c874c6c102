#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcnet/error.hpp"
#include "dcnet/sparse_matrix.hpp"

namespace dcnet {

namespace detail {

inline void sorted_union_into(std::vector<std::size_t>& dst, std::span<const std::size_t> src,
                              std::size_t skip_a, std::size_t skip_b) {
    std::vector<std::size_t> merged;
    merged.reserve(dst.size() + src.size());
    auto a = dst.begin();
    auto b = src.begin();
    while (a != dst.end() || b != src.end()) {
        std::size_t v;
        if (b == src.end() || (a != dst.end() && *a < *b)) {
            v = *a++;
        } else if (a == dst.end() || *b < *a) {
            v = *b++;
        } else {
            v = *a++;
            ++b;
        }
        if (v != skip_a && v != skip_b) merged.push_back(v);
    }
    dst.swap(merged);
}

}  // namespace detail

/// Minimum degree ordering on the symmetrized off-diagonal pattern of a
/// square matrix. Operates on the explicit elimination graph; ties are
/// broken by the lowest node index so the ordering is deterministic.
inline std::vector<std::size_t> minimum_degree_ordering(const CsrMatrix<double>& a) {
    if (a.rows() != a.cols()) throw ValidationError("ordering requires a square matrix");
    const std::size_t n = a.rows();
    std::vector<std::vector<std::size_t>> adj(n);
    const auto off = a.row_offsets();
    const auto col = a.col_indices();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t p = off[r]; p < off[r + 1]; ++p) {
            if (col[p] == r) continue;
            adj[r].push_back(col[p]);
            adj[col[p]].push_back(r);
        }
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    std::set<std::pair<std::size_t, std::size_t>> queue;
    for (std::size_t v = 0; v < n; ++v) queue.emplace(adj[v].size(), v);

    std::vector<std::size_t> order;
    order.reserve(n);
    while (!queue.empty()) {
        const std::size_t v = queue.begin()->second;
        queue.erase(queue.begin());
        order.push_back(v);

        const std::vector<std::size_t> clique = std::move(adj[v]);
        adj[v].clear();
        for (std::size_t u : clique) {
            queue.erase({adj[u].size(), u});
            detail::sorted_union_into(adj[u], clique, u, v);
            queue.emplace(adj[u].size(), u);
        }
    }
    return order;
}

/// Structure shared by every factorization of (sigma * Id - A) for one A:
/// the fill-reducing column order and the column-compressed pattern of
/// Id + A with A's values attached.
class SparseLuAnalysis {
public:
    SparseLuAnalysis() = default;

    explicit SparseLuAnalysis(const CsrMatrix<double>& a)
        : n_(a.rows()), order_(minimum_degree_ordering(a)), a_nnz_(a.nnz()) {
        // Column j of A is row j of A^T.
        const CsrMatrix<double> at = a.transpose();
        const auto off = at.row_offsets();
        const auto idx = at.col_indices();
        const auto val = at.values();
        col_ptr_.assign(n_ + 1, 0);
        for (std::size_t j = 0; j < n_; ++j) {
            bool diag_seen = false;
            for (std::size_t p = off[j]; p < off[j + 1]; ++p) {
                if (!diag_seen && idx[p] > j) {
                    push(j, 0.0, true);
                    diag_seen = true;
                }
                const bool is_diag = idx[p] == j;
                diag_seen = diag_seen || is_diag;
                push(idx[p], val[p], is_diag);
            }
            if (!diag_seen) push(j, 0.0, true);
            col_ptr_[j + 1] = row_idx_.size();
        }
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t matrix_nnz() const noexcept { return a_nnz_; }
    std::span<const std::size_t> column_order() const noexcept { return order_; }

    std::span<const std::size_t> col_ptr() const noexcept { return col_ptr_; }
    std::span<const std::size_t> row_idx() const noexcept { return row_idx_; }
    std::span<const double> a_values() const noexcept { return a_val_; }
    bool is_diagonal(std::size_t p) const noexcept { return diag_[p] != 0; }

private:
    void push(std::size_t row, double value, bool diag) {
        row_idx_.push_back(row);
        a_val_.push_back(value);
        diag_.push_back(diag ? 1 : 0);
    }

    std::size_t n_ = 0;
    std::vector<std::size_t> order_;
    std::size_t a_nnz_ = 0;
    std::vector<std::size_t> col_ptr_;
    std::vector<std::size_t> row_idx_;
    std::vector<double> a_val_;
    std::vector<std::uint8_t> diag_;
};

/// LU factorization of (sigma * Id - A), left-looking with threshold partial
/// pivoting. A candidate diagonal pivot is kept whenever its magnitude is at
/// least `pivot_tol` times the largest candidate in its column.
///
/// Immutable once built; `solve` is reentrant.
template <class Scalar>
class ShiftedLu {
public:
    static ShiftedLu factorize(const SparseLuAnalysis& analysis, Scalar sigma,
                               double pivot_tol = 0.1) {
        ShiftedLu f;
        f.sigma_ = sigma;
        f.n_ = analysis.size();
        f.order_.assign(analysis.column_order().begin(), analysis.column_order().end());
        f.run(analysis, pivot_tol);
        return f;
    }

    std::size_t size() const noexcept { return n_; }
    Scalar shift() const noexcept { return sigma_; }
    std::size_t nnz_l() const noexcept { return l_val_.size(); }
    std::size_t nnz_u() const noexcept { return u_val_.size(); }

    /// Solves (sigma * Id - A) x = rhs. `x` may alias `rhs`.
    void solve(std::span<const Scalar> rhs, std::span<Scalar> x) const {
        if (rhs.size() != n_ || x.size() != n_) {
            throw ValidationError("solve: vector length " + std::to_string(rhs.size()) +
                                  " does not match factorization size " + std::to_string(n_));
        }
        std::vector<Scalar> w(n_);
        for (std::size_t i = 0; i < n_; ++i) w[row_perm_[i]] = rhs[i];
        // L is unit lower triangular, diagonal stored first in each column.
        for (std::size_t j = 0; j < n_; ++j) {
            const Scalar xj = w[j];
            if (xj == Scalar{}) continue;
            for (std::size_t p = l_ptr_[j] + 1; p < l_ptr_[j + 1]; ++p) {
                w[l_idx_[p]] -= l_val_[p] * xj;
            }
        }
        // U is upper triangular, diagonal stored last in each column.
        for (std::size_t j = n_; j-- > 0;) {
            w[j] /= u_val_[u_ptr_[j + 1] - 1];
            const Scalar xj = w[j];
            if (xj == Scalar{}) continue;
            for (std::size_t p = u_ptr_[j]; p + 1 < u_ptr_[j + 1]; ++p) {
                w[u_idx_[p]] -= u_val_[p] * xj;
            }
        }
        for (std::size_t k = 0; k < n_; ++k) x[order_[k]] = w[k];
    }

    std::vector<Scalar> solve(std::span<const Scalar> rhs) const {
        std::vector<Scalar> x(n_);
        solve(rhs, x);
        return x;
    }

private:
    void run(const SparseLuAnalysis& an, double pivot_tol) {
        const std::size_t n = n_;
        const auto mp = an.col_ptr();
        const auto mi = an.row_idx();
        const auto ma = an.a_values();

        constexpr std::size_t unset = static_cast<std::size_t>(-1);
        std::vector<std::size_t> pinv(n, unset);
        std::vector<Scalar> x(n, Scalar{});
        std::vector<std::size_t> xi(n);
        std::vector<std::size_t> stack(n);
        std::vector<std::size_t> pstack(n);
        std::vector<std::size_t> mark(n, unset);

        l_ptr_.assign(n + 1, 0);
        u_ptr_.assign(n + 1, 0);
        const std::size_t guess = 4 * an.matrix_nnz() + n;
        l_idx_.reserve(guess);
        l_val_.reserve(guess);
        u_idx_.reserve(guess);
        u_val_.reserve(guess);

        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t col = order_[k];
            l_ptr_[k] = l_val_.size();
            u_ptr_[k] = u_val_.size();

            // Nonzero pattern of L \ M(:, col) by depth-first search over L.
            std::size_t top = n;
            for (std::size_t p = mp[col]; p < mp[col + 1]; ++p) {
                const std::size_t start = mi[p];
                if (mark[start] == k) continue;
                std::size_t head = 0;
                stack[0] = start;
                while (true) {
                    const std::size_t j = stack[head];
                    const std::size_t jcol = pinv[j];
                    if (mark[j] != k) {
                        mark[j] = k;
                        pstack[head] = jcol == unset ? 0 : l_ptr_[jcol] + 1;
                    }
                    bool done = true;
                    const std::size_t pend = jcol == unset ? 0 : l_ptr_[jcol + 1];
                    for (std::size_t q = pstack[head]; q < pend; ++q) {
                        const std::size_t i = l_idx_[q];
                        if (mark[i] == k) continue;
                        pstack[head] = q + 1;
                        stack[++head] = i;
                        done = false;
                        break;
                    }
                    if (done) {
                        xi[--top] = j;
                        if (head == 0) break;
                        --head;
                    }
                }
            }

            // Numeric triangular solve in topological order.
            for (std::size_t p = top; p < n; ++p) x[xi[p]] = Scalar{};
            for (std::size_t p = mp[col]; p < mp[col + 1]; ++p) {
                x[mi[p]] = (an.is_diagonal(p) ? sigma_ : Scalar{}) - Scalar(ma[p]);
            }
            for (std::size_t p = top; p < n; ++p) {
                const std::size_t j = xi[p];
                const std::size_t jcol = pinv[j];
                if (jcol == unset) continue;
                const Scalar xj = x[j];
                for (std::size_t q = l_ptr_[jcol] + 1; q < l_ptr_[jcol + 1]; ++q) {
                    x[l_idx_[q]] -= l_val_[q] * xj;
                }
            }

            // Pivot selection.
            std::size_t ipiv = unset;
            double best = -1.0;
            for (std::size_t p = top; p < n; ++p) {
                const std::size_t i = xi[p];
                if (pinv[i] == unset) {
                    const double mag = std::abs(x[i]);
                    if (mag > best) {
                        best = mag;
                        ipiv = i;
                    }
                } else {
                    u_idx_.push_back(pinv[i]);
                    u_val_.push_back(x[i]);
                }
            }
            if (ipiv == unset || !(best > 0.0) || !std::isfinite(best)) {
                throw SingularMatrixError(k, "shifted matrix is numerically singular at pivot " +
                                                 std::to_string(k) + " (column " +
                                                 std::to_string(col) + ")");
            }
            if (pinv[col] == unset && mark[col] == k && std::abs(x[col]) >= pivot_tol * best) {
                ipiv = col;
            }
            const Scalar pivot = x[ipiv];
            u_idx_.push_back(k);
            u_val_.push_back(pivot);
            pinv[ipiv] = k;
            l_idx_.push_back(ipiv);
            l_val_.push_back(Scalar{1});
            for (std::size_t p = top; p < n; ++p) {
                const std::size_t i = xi[p];
                if (pinv[i] == unset) {
                    l_idx_.push_back(i);
                    l_val_.push_back(x[i] / pivot);
                }
                x[i] = Scalar{};
            }
        }
        l_ptr_[n] = l_val_.size();
        u_ptr_[n] = u_val_.size();
        for (auto& i : l_idx_) i = pinv[i];
        row_perm_ = std::move(pinv);
    }

    Scalar sigma_{};
    std::size_t n_ = 0;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> row_perm_;
    std::vector<std::size_t> l_ptr_, l_idx_;
    std::vector<Scalar> l_val_;
    std::vector<std::size_t> u_ptr_, u_idx_;
    std::vector<Scalar> u_val_;
};

/// One-shot convenience: analyse A and factorize (sigma * Id - A).
template <class Scalar>
ShiftedLu<Scalar> factorize_shifted(const CsrMatrix<double>& a, Scalar sigma) {
    if (a.rows() != a.cols()) throw ValidationError("factorize_shifted requires a square matrix");
    return ShiftedLu<Scalar>::factorize(SparseLuAnalysis(a), sigma);
}

}  // namespace dcnet
