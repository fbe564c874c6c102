#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcnet/json_io.hpp"
#include "dcnet/sparse_matrix.hpp"

namespace dcnet::test {

inline std::filesystem::path data_dir() { return DCNET_DATA_DIR; }

inline NetworkTopology catalog(const std::string& name) {
    return load_topology(data_dir() / "topologies" / (name + ".json"));
}

/// Networks in ascending state dimension.
inline const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names = {
        "case4gs",      "case5",          "case6ww",       "case9",         "case14",
        "case24_ieee_rts", "case30",      "case_ieee30",   "case33bw",      "case39",
        "case57",       "case89pegase",   "case118",       "case145",       "case_illinois200",
        "case300",      "case1354pegase", "case1888rte",   "GBnetwork",     "case2848rte",
        "case2869pegase", "case3120sp",   "case6470rte",   "case6495rte",   "case6515rte",
        "case9241pegase"};
    return names;
}

inline Eigen::MatrixXd to_eigen(const CsrMatrix<double>& a) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.rows()),
                                              static_cast<Eigen::Index>(a.cols()));
    const auto off = a.row_offsets();
    const auto col = a.col_indices();
    const auto val = a.values();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t p = off[r]; p < off[r + 1]; ++p) {
            d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col[p])) = val[p];
        }
    }
    return d;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Random sparse matrix with a given fill probability; values in [-1, 1].
inline CsrMatrix<double> random_sparse(std::size_t n, double density, std::mt19937_64& rng,
                                       double diagonal_shift = 0.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution keep(density);
    std::vector<Triplet<double>> trip;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            if (keep(rng)) trip.push_back({r, c, u(rng)});
        }
        if (diagonal_shift != 0.0) trip.push_back({r, r, diagonal_shift});
    }
    return CsrMatrix<double>::from_triplets(n, n, std::move(trip));
}

/// max_ij |a_ij - b_ij| / max(1, |b_ij|)
inline double max_relative_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return ((a - b).cwiseAbs().array() / b.cwiseAbs().array().max(1.0)).maxCoeff();
}

}  // namespace dcnet::test

#include "dcnet/scenario.hpp"

namespace dcnet::test {

/// Brute-force dense assembly from block matrices, independent of the
/// sparse assembly code path.
inline Eigen::MatrixXd dense_assembly(const Scenario& s, Eigen::VectorXd* b_out = nullptr) {
    using Eigen::Index;
    const auto n = static_cast<Index>(s.n());
    const auto m = static_cast<Index>(s.m());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, m);
    for (Index e = 0; e < m; ++e) {
        const auto& edge = s.topology.edges[static_cast<std::size_t>(e)];
        b(static_cast<Index>(edge.from), e) += 1.0;
        b(static_cast<Index>(edge.to), e) -= 1.0;
    }
    Eigen::MatrixXd lcom = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < s.com.size(); ++k) {
        const auto i = static_cast<Index>(s.com.edges[k].from);
        const auto j = static_cast<Index>(s.com.edges[k].to);
        const double g = s.com.weights[k];
        lcom(i, i) += g;
        lcom(j, j) += g;
        lcom(i, j) -= g;
        lcom(j, i) -= g;
    }
    auto diag = [](const std::vector<double>& v) {
        return Eigen::MatrixXd(to_eigen(v).asDiagonal());
    };
    auto inv = [](const std::vector<double>& v) {
        Eigen::VectorXd d = to_eigen(v);
        return Eigen::MatrixXd(d.cwiseInverse().asDiagonal());
    };
    const Eigen::MatrixXd lf = inv(s.filter_inductance), cl = inv(s.capacitance),
                          ll = inv(s.line_inductance), tt = inv(s.theta_time_constant),
                          tp = inv(s.phi_time_constant);
    const Eigen::MatrixXd k = diag(s.controller_gain), w = diag(s.sharing_weight),
                          r = diag(s.line_resistance);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);

    const Index dim = 4 * n + m;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    const Index iI = 0, iV = n, iF = 2 * n, iT = 2 * n + m, iP = 3 * n + m;
    a.block(iI, iI, n, n) = -lf * k;
    a.block(iI, iV, n, n) = -lf;
    a.block(iI, iT, n, n) = lf * w * lcom;
    a.block(iI, iP, n, n) = lf * k;
    a.block(iV, iI, n, n) = cl;
    a.block(iV, iF, n, m) = cl * b;
    a.block(iF, iV, m, n) = -ll * b.transpose();
    a.block(iF, iF, m, m) = -ll * r;
    a.block(iT, iI, n, n) = -tt * lcom * w;
    a.block(iP, iI, n, n) = tp * id;
    a.block(iP, iP, n, n) = -tp;
    if (b_out) {
        *b_out = Eigen::VectorXd::Zero(dim);
        b_out->segment(iI, n) = lf * to_eigen(s.reference_voltage);
        b_out->segment(iV, n) = -cl * to_eigen(s.load_current);
    }
    return a;
}

}  // namespace dcnet::test

#include <algorithm>
#include <cmath>

namespace dcnet::test {

/// ||a - b||_inf / max(||a||_inf, ||b||_inf)
inline double relative_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
    }
    return scale > 0.0 ? diff / scale : diff;
}

}  // namespace dcnet::test
