#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dcnet/affine_system.hpp"
#include "dcnet/graph.hpp"
#include "dcnet/scenario.hpp"

namespace dcnet::harness {

struct InvariantResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline double max_asymmetry(const CsrMatrix<double>& a) {
    const auto at = a.transpose();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) {
            worst = std::max(worst, std::abs(a.values()[p] - at.at(i, a.col_indices()[p])));
        }
    }
    return worst;
}

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace detail

/// Structural checks on one scenario: graph identities, system shape and
/// the conserved weighted theta sum.
inline std::vector<InvariantResult> check_invariants(const Scenario& s) {
    std::vector<InvariantResult> out;
    const std::size_t n = s.n(), m = s.m();

    const auto b = incidence_matrix(s.topology);
    double colsum = 0.0;
    {
        std::vector<double> acc(m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t p = b.row_offsets()[i]; p < b.row_offsets()[i + 1]; ++p) acc[b.col_indices()[p]] += b.values()[p];
        }
        for (double v : acc) colsum = std::max(colsum, std::abs(v));
    }
    out.push_back({"incidence_columns_sum_to_zero", colsum == 0.0, "max |1^T B| = " + detail::sci(colsum)});

    std::vector<double> conductance(m);
    for (std::size_t e = 0; e < m; ++e) conductance[e] = 1.0 / s.line_resistance[e];
    for (const auto& [label, lap] :
         {std::pair{std::string("physical_laplacian"), weighted_laplacian(b, conductance)},
          std::pair{std::string("communication_laplacian"), communication_laplacian(n, s.com)}}) {
        const std::vector<double> ones(n, 1.0);
        double row = 0.0;
        for (double v : spmv(lap, ones)) row = std::max(row, std::abs(v));
        const double scale = std::max(1.0, norm_inf(lap));
        out.push_back({label + "_kernel", row <= 1e-12 * scale, "max |L 1| = " + detail::sci(row)});
        const double asym = detail::max_asymmetry(lap);
        out.push_back({label + "_symmetric", asym <= 1e-12 * scale, "max |L - L^T| = " + detail::sci(asym)});
    }

    const AffineSystem sys = assemble(s);
    const bool shape = sys.dimension() == 4 * n + m && sys.jacobian().rows() == sys.dimension() &&
                       sys.jacobian().cols() == sys.dimension();
    out.push_back({"state_dimension", shape, "4n+m = " + std::to_string(sys.dimension())});

    // d/dt 1^T T_theta theta = -1^T L_com W I = 0, so the T_theta-weighted
    // theta rows of A must cancel column by column
    const auto& a = sys.jacobian();
    const StateLayout lay = sys.layout();
    std::vector<double> acc(sys.dimension(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = lay.theta() + i;
        for (std::size_t p = a.row_offsets()[r]; p < a.row_offsets()[r + 1]; ++p) {
            acc[a.col_indices()[p]] += s.theta_time_constant[i] * a.values()[p];
        }
    }
    double drift = 0.0;
    for (double v : acc) drift = std::max(drift, std::abs(v));
    out.push_back({"theta_moment_conserved", drift <= 1e-12 * std::max(1.0, norm_inf(a)),
                   "max |T_theta^T A_theta| = " + detail::sci(drift)});

    const bool has_target = std::any_of(s.topology.generator.begin(), s.topology.generator.end(),
                                        [](bool g) { return !g; });
    out.push_back({"has_non_generator_node", has_target,
                   has_target ? "load step target node " + std::to_string(first_non_generator(s.topology) + 1)
                              : "every node is a generator"});
    return out;
}

}  // namespace dcnet::harness
