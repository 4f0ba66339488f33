#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scesame/affinity.hpp"

namespace scesame {

enum class LaplacianVariant { Unnormalized, Normalized };

const char* to_string(LaplacianVariant v);
LaplacianVariant parse_laplacian_variant(const std::string& name);

// Degrees below this are clamped before D^{-1/2}.
inline constexpr double kDegreeFloor = 1e-12;

struct GraphLaplacian {
    LaplacianVariant variant = LaplacianVariant::Normalized;
    Eigen::MatrixXd matrix;
    Eigen::VectorXd degrees;
};

struct SpectralEmbedding {
    int k = 0;
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd vectors;      // n x k; row i is the embedding of vertex i
};

struct ClusterAssignment {
    std::vector<int> labels;
    std::vector<std::vector<int>> clusters;

    int k() const noexcept { return static_cast<int>(clusters.size()); }
};

struct KMeansOptions {
    int restarts = 10;
    int max_iterations = 300;
    double tolerance = 1e-6;
    std::uint64_t seed = 0;
};

struct SpectralOptions {
    LaplacianVariant variant = LaplacianVariant::Normalized;
    // Scale embedding rows to unit length before k-means (Ng-Jordan-Weiss).
    bool row_normalize = false;
    KMeansOptions kmeans;
};

// Throws Error(InvalidAffinity) for asymmetric, negative or non-finite input.
GraphLaplacian build_laplacian(const AffinityMatrix& w, LaplacianVariant variant);

// The k smallest eigenpairs of a dense symmetric Laplacian.
SpectralEmbedding spectral_embedding(const GraphLaplacian& lap, int k);

// Rows of `points` are observations. Seeded k-means++ with restarts; returns
// the lowest-WCSS restart with labels renumbered by first appearance.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& opts = {});

double within_cluster_ss(const Eigen::MatrixXd& points, std::span<const int> labels);

ClusterAssignment spectral_cluster(const AffinityMatrix& w, int k, const SpectralOptions& opts = {});

// Label-permutation-invariant agreement of two clusterings.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

ClusterAssignment assignment_from_labels(std::span<const int> labels, int k);

}  // namespace scesame
