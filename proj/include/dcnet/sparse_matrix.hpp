#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dcnet/error.hpp"

namespace dcnet {

template <class T>
struct Triplet {
    std::size_t row;
    std::size_t col;
    T value;
};

/// Compressed sparse row matrix. Column indices are sorted and unique
/// within each row and structural zeros are never stored.
template <class T>
class CsrMatrix {
public:
    using value_type = T;

    CsrMatrix() : row_offsets_(1, 0) {}

    CsrMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

    /// Builds from unordered triplets. Duplicates are summed; entries that
    /// are exactly zero after summation are dropped.
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<Triplet<T>> triplets) {
        for (const auto& t : triplets) {
            if (t.row >= rows || t.col >= cols) {
                throw ValidationError("triplet (" + std::to_string(t.row) + ", " +
                                      std::to_string(t.col) + ") outside " +
                                      std::to_string(rows) + "x" + std::to_string(cols));
            }
        }
        std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });

        CsrMatrix m(rows, cols);
        m.col_indices_.reserve(triplets.size());
        m.values_.reserve(triplets.size());
        std::size_t k = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            while (k < triplets.size() && triplets[k].row == r) {
                const std::size_t c = triplets[k].col;
                T sum{};
                while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
                    sum += triplets[k].value;
                    ++k;
                }
                if (sum != T{}) {
                    m.col_indices_.push_back(c);
                    m.values_.push_back(sum);
                }
            }
            m.row_offsets_[r + 1] = m.col_indices_.size();
        }
        return m;
    }

    static CsrMatrix identity(std::size_t n) {
        CsrMatrix m(n, n);
        m.col_indices_.resize(n);
        m.values_.assign(n, T{1});
        std::iota(m.col_indices_.begin(), m.col_indices_.end(), std::size_t{0});
        std::iota(m.row_offsets_.begin(), m.row_offsets_.end(), std::size_t{0});
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
    std::span<const T> values() const noexcept { return values_; }

    /// Entry lookup by binary search within the row; zero if not stored.
    T at(std::size_t r, std::size_t c) const {
        const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r]);
        const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r + 1]);
        const auto it = std::lower_bound(first, last, c);
        if (it == last || *it != c) return T{};
        return values_[static_cast<std::size_t>(it - col_indices_.begin())];
    }

    /// y = A x
    void multiply(std::span<const T> x, std::span<T> y) const {
        check_dims(x.size(), y.size());
        for (std::size_t r = 0; r < rows_; ++r) {
            T acc{};
            for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
                acc += values_[p] * x[col_indices_[p]];
            }
            y[r] = acc;
        }
    }

    /// y = A x + b, the form every right-hand side in this library takes.
    void multiply_add(std::span<const T> x, std::span<const T> b, std::span<T> y) const {
        check_dims(x.size(), y.size());
        if (b.size() != rows_) throw ValidationError("offset vector length mismatch");
        for (std::size_t r = 0; r < rows_; ++r) {
            T acc = b[r];
            for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
                acc += values_[p] * x[col_indices_[p]];
            }
            y[r] = acc;
        }
    }

    CsrMatrix transpose() const {
        CsrMatrix t(cols_, rows_);
        for (std::size_t c : col_indices_) ++t.row_offsets_[c + 1];
        std::partial_sum(t.row_offsets_.begin(), t.row_offsets_.end(), t.row_offsets_.begin());
        t.col_indices_.resize(nnz());
        t.values_.resize(nnz());
        std::vector<std::size_t> next(t.row_offsets_.begin(), t.row_offsets_.end() - 1);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
                const std::size_t dst = next[col_indices_[p]]++;
                t.col_indices_[dst] = r;
                t.values_[dst] = values_[p];
            }
        }
        return t;
    }

    /// Row-major dense copy.
    std::vector<T> to_dense() const {
        std::vector<T> d(rows_ * cols_, T{});
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
                d[r * cols_ + col_indices_[p]] = values_[p];
            }
        }
        return d;
    }

    std::vector<Triplet<T>> to_triplets() const {
        std::vector<Triplet<T>> out;
        out.reserve(nnz());
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
                out.push_back({r, col_indices_[p], values_[p]});
            }
        }
        return out;
    }

    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

private:
    void check_dims(std::size_t nx, std::size_t ny) const {
        if (nx != cols_ || ny != rows_) {
            throw ValidationError("spmv dimension mismatch: matrix " + std::to_string(rows_) +
                                  "x" + std::to_string(cols_) + ", x " + std::to_string(nx) +
                                  ", y " + std::to_string(ny));
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<std::size_t> col_indices_;
    std::vector<T> values_;
};

template <class T>
std::vector<T> spmv(const CsrMatrix<T>& a, std::type_identity_t<std::span<const T>> x) {
    std::vector<T> y(a.rows());
    a.multiply(x, y);
    return y;
}

/// Infinity norm (max absolute row sum).
template <class T>
double norm_inf(const CsrMatrix<T>& a) {
    double best = 0.0;
    const auto off = a.row_offsets();
    const auto val = a.values();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (std::size_t p = off[r]; p < off[r + 1]; ++p) s += std::abs(val[p]);
        best = std::max(best, s);
    }
    return best;
}

}  // namespace dcnet
