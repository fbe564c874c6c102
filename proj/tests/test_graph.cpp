#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dcnet/graph.hpp"
#include "dcnet/json_io.hpp"
#include "support.hpp"

using namespace dcnet;
using dcnet::test::to_eigen;

namespace {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

NetworkTopology triangle() {
    const Pairs p = {{1, 0}, {2, 1}, {2, 0}};
    const std::vector<std::size_t> g = {0, 2};
    return make_topology("tri", 3, p, g);
}

}  // namespace

TEST(Graph, IncidenceOfTriangle) {
    const auto b = incidence_matrix(triangle());
    ASSERT_EQ(b.rows(), 3u);
    ASSERT_EQ(b.cols(), 3u);
    EXPECT_EQ(b.at(1, 0), 1.0);
    EXPECT_EQ(b.at(0, 0), -1.0);
    EXPECT_EQ(b.at(2, 1), 1.0);
    EXPECT_EQ(b.at(1, 1), -1.0);
    EXPECT_EQ(b.at(2, 2), 1.0);
    EXPECT_EQ(b.at(0, 2), -1.0);
}

TEST(Graph, MakeTopologyFlipsReversedPairs) {
    const Pairs p = {{0, 1}, {2, 1}};
    const std::vector<std::size_t> g;
    std::vector<std::string> warnings;
    const auto t = make_topology("x", 3, p, g, &warnings);
    EXPECT_EQ(t.edges[0], (Edge{1, 0}));
    ASSERT_FALSE(warnings.empty());
    EXPECT_NE(warnings[0].find("reoriented"), std::string::npos);
}

TEST(Graph, ValidateRejectsSelfLoopAndRange) {
    NetworkTopology t{"bad", 3, {{1, 1}}, {false, false, false}};
    EXPECT_THROW(validate(t), ValidationError);
    t.edges = {{3, 0}};
    EXPECT_THROW(validate(t), ValidationError);
    t.edges = {{0, 2}};
    EXPECT_THROW(validate(t), ValidationError);
}

TEST(Graph, ErrorNamesOffendingEdge) {
    NetworkTopology t{"bad", 3, {{1, 0}, {2, 2}}, {false, false, false}};
    try {
        validate(t);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("(3, 3)"), std::string::npos);
    }
}

TEST(Graph, ParallelEdgesAndDisconnectionWarn) {
    const Pairs p = {{1, 0}, {1, 0}, {3, 2}};
    const std::vector<std::size_t> g;
    std::vector<std::string> w;
    const auto t = make_topology("x", 4, p, g, &w);
    EXPECT_EQ(t.m(), 3u);
    EXPECT_EQ(w.size(), 2u);
    EXPECT_EQ(connected_components(4, t.edges), 2u);
}

TEST(Graph, LaplacianMatchesTripleProduct) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (const char* name : {"case9", "case14", "case30", "case57"}) {
        const auto t = test::catalog(name);
        const auto b = incidence_matrix(t);
        std::vector<double> w(t.m());
        for (auto& x : w) x = u(rng);
        const auto l = weighted_laplacian(b, w);
        const Eigen::MatrixXd bd = to_eigen(b);
        const Eigen::MatrixXd ref = bd * to_eigen(w).asDiagonal() * bd.transpose();
        EXPECT_LE((to_eigen(l) - ref).cwiseAbs().maxCoeff(), 1e-12) << name;
    }
}

TEST(Graph, LaplacianRejectsNonpositiveWeight) {
    const auto b = incidence_matrix(triangle());
    const std::vector<double> w = {1.0, 0.0, 1.0};
    EXPECT_THROW(weighted_laplacian(b, w), ValidationError);
}

TEST(Graph, RingSizes) {
    NetworkTopology t{"r", 5, {}, {false, false, false, false, false}};
    EXPECT_EQ(ring_communication(t, 1.0).size(), 0u);
    t.generator[3] = true;
    EXPECT_EQ(ring_communication(t, 1.0).size(), 0u);
    t.generator[1] = true;
    const auto two = ring_communication(t, 2.0);
    ASSERT_EQ(two.size(), 1u);
    EXPECT_EQ(two.edges[0], (Edge{3, 1}));
    t.generator[4] = true;
    const auto three = ring_communication(t, 2.0);
    EXPECT_EQ(three.size(), 3u);
    EXPECT_NO_THROW(validate(three, t));
    // laplacian of an empty communication graph is the zero matrix
    t.generator.assign(5, false);
    EXPECT_EQ(communication_laplacian(5, ring_communication(t, 1.0)).nnz(), 0u);
}

TEST(Graph, CommunicationEdgeMustJoinGenerators) {
    const auto t = triangle();
    CommunicationGraph com{{{1, 0}}, {1.0}};
    EXPECT_THROW(validate(com, t), ValidationError);
}

// Every catalog network: columns of B sum to zero, L 1 = 0, L symmetric.
TEST(Graph, CatalogInvariantsProperty) {
    for (const auto& name : test::catalog_names()) {
        const auto t = test::catalog(name);
        const auto b = incidence_matrix(t);
        std::vector<double> colsum(t.m(), 0.0);
        const auto bt = b.transpose();
        for (std::size_t e = 0; e < t.m(); ++e) {
            double s = 0.0;
            for (std::size_t p = bt.row_offsets()[e]; p < bt.row_offsets()[e + 1]; ++p) s += bt.values()[p];
            ASSERT_EQ(s, 0.0) << name;
        }
        const auto l = weighted_laplacian(b, std::vector<double>(t.m(), 1.0));
        const std::vector<double> ones(t.n, 1.0);
        for (double v : spmv(l, ones)) ASSERT_EQ(v, 0.0) << name;
    }
}

TEST(TopologyJson, RoundTrip) {
    const auto t = triangle();
    EXPECT_EQ(topology_from_json(topology_to_json(t)), t);
}

TEST(TopologyJson, SchemaErrors) {
    EXPECT_THROW(topology_from_json(json::parse(R"({"n": 0, "edges": []})")), SchemaError);
    EXPECT_THROW(topology_from_json(json::parse(R"({"n": 2, "edges": [[1]]})")), SchemaError);
    EXPECT_THROW(topology_from_json(json::parse(R"({"n": 2, "edges": [[1, 3]]})")), ValidationError);
    EXPECT_THROW(topology_from_json(json::parse(R"({"n": 2, "edges": [[1, 1]]})")), ValidationError);
    EXPECT_THROW(load_topology("/nonexistent/file.json"), IoError);
}

TEST(TopologyJson, CatalogLoadsWithExpectedCounts) {
    const auto t = test::catalog("case9");
    EXPECT_EQ(t.n, 9u);
    EXPECT_EQ(t.m(), 9u);
    EXPECT_EQ(t.generator_count(), 2u);
    EXPECT_EQ(t.state_dimension(), 45u);
    EXPECT_EQ(test::catalog("case4gs").state_dimension(), 20u);
}
