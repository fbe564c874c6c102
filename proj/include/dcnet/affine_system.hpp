#pragma once

#include <cstddef>
#include <iomanip>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcnet/error.hpp"
#include "dcnet/graph.hpp"
#include "dcnet/scenario.hpp"
#include "dcnet/sparse_matrix.hpp"

namespace dcnet {

/// The closed-loop network dynamics x' = A x + b.
///
/// A is shared between copies and never mutated; load changes produce a new
/// system that differs only in b, so factorizations of shifted A stay valid
/// across load events.
class AffineSystem {
public:
    AffineSystem() = default;

    /// A bare affine ODE without network metadata (used for test problems).
    AffineSystem(CsrMatrix<double> a, std::vector<double> b)
        : a_(std::make_shared<const CsrMatrix<double>>(std::move(a))), b_(std::move(b)) {
        if (a_->rows() != a_->cols() || a_->rows() != b_.size()) {
            throw ValidationError("affine system needs a square A matching b");
        }
    }

    std::size_t dimension() const noexcept { return b_.size(); }
    const CsrMatrix<double>& jacobian() const noexcept { return *a_; }
    std::shared_ptr<const CsrMatrix<double>> shared_jacobian() const noexcept { return a_; }
    std::span<const double> offset() const noexcept { return b_; }

    std::size_t n() const noexcept { return layout_.n; }
    std::size_t m() const noexcept { return layout_.m; }
    std::size_t m_com() const noexcept { return m_com_; }
    const StateLayout& layout() const noexcept { return layout_; }
    const std::vector<bool>& generator() const noexcept { return generator_; }

    /// out = A x + b, O(nnz(A)).
    void rhs(std::span<const double> x, std::span<double> out) const {
        if (x.size() != dimension() || out.size() != dimension()) {
            throw ValidationError("rhs: state has length " + std::to_string(x.size()) +
                                  ", system dimension is " + std::to_string(dimension()));
        }
        a_->multiply_add(x, b_, out);
    }

    std::vector<double> rhs(std::span<const double> x) const {
        std::vector<double> out(dimension());
        rhs(x, out);
        return out;
    }

    /// Returns a copy whose load at `node` (0-based) is `amps`. Only the
    /// voltage block of b changes: b_V[node] = -amps / C^L[node].
    AffineSystem with_load(std::size_t node, double amps) const {
        if (node >= layout_.n || capacitance_.size() != layout_.n) {
            throw ValidationError("load change: node " + std::to_string(node + 1) +
                                  " outside [1, " + std::to_string(layout_.n) + "]");
        }
        AffineSystem out = *this;
        out.b_[layout_.voltage() + node] = -amps / capacitance_[node];
        return out;
    }

    friend AffineSystem assemble(const Scenario& s);

private:
    std::shared_ptr<const CsrMatrix<double>> a_ = std::make_shared<const CsrMatrix<double>>();
    std::vector<double> b_;
    StateLayout layout_;
    std::size_t m_com_ = 0;
    std::vector<bool> generator_;
    std::vector<double> capacitance_;
};

/// Assembles the closed-loop system, every block row divided through by its
/// diagonal coefficient:
///   L^f I'     = -V - K (I - phi) + W L_com theta + V*
///   C^L V'     = I + B f - I_L
///   L f'       = -B^T V - R f
///   T_theta th' = -L_com W I
///   T_phi phi' = -phi + I
inline AffineSystem assemble(const Scenario& s) {
    try {
        validate(s);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("assembly: ") + e.what());
    }
    const std::size_t n = s.n();
    const std::size_t m = s.m();
    const StateLayout lay{n, m};
    const std::size_t iI = lay.current(), iV = lay.voltage(), iF = lay.line(),
                      iT = lay.theta(), iP = lay.phi();

    const CsrMatrix<double> b = incidence_matrix(s.topology);
    const CsrMatrix<double> lcom = communication_laplacian(n, s.com);

    const auto& lf = s.filter_inductance;
    const auto& cl = s.capacitance;
    const auto& w = s.sharing_weight;

    std::vector<Triplet<double>> trip;
    trip.reserve(8 * n + 5 * m + 4 * lcom.nnz());

    for (std::size_t i = 0; i < n; ++i) {
        trip.push_back({iI + i, iI + i, -s.controller_gain[i] / lf[i]});
        trip.push_back({iI + i, iV + i, -1.0 / lf[i]});
        trip.push_back({iI + i, iP + i, s.controller_gain[i] / lf[i]});
        trip.push_back({iV + i, iI + i, 1.0 / cl[i]});
        trip.push_back({iP + i, iI + i, 1.0 / s.phi_time_constant[i]});
        trip.push_back({iP + i, iP + i, -1.0 / s.phi_time_constant[i]});
    }

    const auto boff = b.row_offsets();
    const auto bcol = b.col_indices();
    const auto bval = b.values();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = boff[i]; p < boff[i + 1]; ++p) {
            const std::size_t e = bcol[p];
            trip.push_back({iV + i, iF + e, bval[p] / cl[i]});
            trip.push_back({iF + e, iV + i, -bval[p] / s.line_inductance[e]});
        }
    }
    for (std::size_t e = 0; e < m; ++e) {
        trip.push_back({iF + e, iF + e, -s.line_resistance[e] / s.line_inductance[e]});
    }

    const auto loff = lcom.row_offsets();
    const auto lcol = lcom.col_indices();
    const auto lval = lcom.values();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = loff[i]; p < loff[i + 1]; ++p) {
            const std::size_t j = lcol[p];
            trip.push_back({iI + i, iT + j, w[i] * lval[p] / lf[i]});
            trip.push_back({iT + i, iI + j, -lval[p] * w[j] / s.theta_time_constant[i]});
        }
    }

    AffineSystem sys;
    sys.a_ = std::make_shared<const CsrMatrix<double>>(
        CsrMatrix<double>::from_triplets(lay.dimension(), lay.dimension(), std::move(trip)));
    sys.b_.assign(lay.dimension(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        sys.b_[iI + i] = s.reference_voltage[i] / lf[i];
        sys.b_[iV + i] = -s.load_current[i] / cl[i];
    }
    sys.layout_ = lay;
    sys.m_com_ = s.com.size();
    sys.generator_ = s.topology.generator;
    sys.capacitance_ = cl;
    return sys;
}

/// Copy of `system` with the load at 0-based `node` set to `amps`.
inline AffineSystem apply_load_change(const AffineSystem& system, std::size_t node, double amps) {
    return system.with_load(node, amps);
}

/// Row-major dense copy of A for spectral checks; refuses dimensions above
/// `max_dimension`.
inline std::vector<double> dense_view(const AffineSystem& system, std::size_t max_dimension = 500) {
    if (system.dimension() > max_dimension) {
        throw ValidationError("dense view refused: dimension " + std::to_string(system.dimension()) +
                              " exceeds " + std::to_string(max_dimension));
    }
    return system.jacobian().to_dense();
}

/// Matrix Market coordinate format, real general, 1-based indices.
inline void write_matrix_market(const CsrMatrix<double>& a, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    const auto off = a.row_offsets();
    const auto col = a.col_indices();
    const auto val = a.values();
    const auto old = out.precision(17);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t p = off[r]; p < off[r + 1]; ++p) {
            out << (r + 1) << ' ' << (col[p] + 1) << ' ' << val[p] << '\n';
        }
    }
    out.precision(old);
}

}  // namespace dcnet
