#include "scesame/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "scesame/error.hpp"

namespace scesame {

const char* to_string(LaplacianVariant v) {
    return v == LaplacianVariant::Normalized ? "normalized" : "unnormalized";
}

LaplacianVariant parse_laplacian_variant(const std::string& name) {
    if (name == "normalized") return LaplacianVariant::Normalized;
    if (name == "unnormalized") return LaplacianVariant::Unnormalized;
    throw Error(ErrorKind::Parameter, "unknown Laplacian variant '" + name + "'");
}

GraphLaplacian build_laplacian(const AffinityMatrix& affinity, LaplacianVariant variant) {
    const auto& w = affinity.w;
    if (w.rows() != w.cols()) throw Error(ErrorKind::InvalidAffinity, "affinity matrix is not square");
    const Eigen::Index n = w.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = w(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                throw Error(ErrorKind::InvalidAffinity, "affinity entries must be finite and nonnegative");
            }
            if (v != w(j, i)) throw Error(ErrorKind::InvalidAffinity, "affinity matrix is not symmetric");
        }
    }

    GraphLaplacian lap;
    lap.variant = variant;
    lap.degrees = w.rowwise().sum();
    if (variant == LaplacianVariant::Unnormalized) {
        lap.matrix = -w;
        lap.matrix.diagonal() += lap.degrees;
    } else {
        const Eigen::VectorXd inv_sqrt =
            lap.degrees.unaryExpr([](double d) { return 1.0 / std::sqrt(std::max(d, kDegreeFloor)); });
        lap.matrix = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
        lap.matrix.diagonal().array() += 1.0;
    }
    return lap;
}

SpectralEmbedding spectral_embedding(const GraphLaplacian& lap, int k) {
    const Eigen::Index n = lap.matrix.rows();
    if (k < 1 || k > n) throw Error(ErrorKind::Parameter, "embedding dimension must satisfy 1 <= k <= n");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap.matrix);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::Numeric, "symmetric eigensolver did not converge (n = " + std::to_string(n) + ")");
    }
    SpectralEmbedding emb;
    emb.k = k;
    emb.eigenvalues = solver.eigenvalues().head(k);
    emb.vectors = solver.eigenvectors().leftCols(k);
    return emb;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Restart {
    std::vector<int> labels;
    double wcss = std::numeric_limits<double>::infinity();
};

Eigen::MatrixXd seed_centers(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd centers(k, x.cols());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    auto first = std::min<Eigen::Index>(static_cast<Eigen::Index>(unit_uniform(rng) * n), n - 1);
    centers.row(0) = x.row(first);
    chosen[static_cast<std::size_t>(first)] = 1;

    Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double target = unit_uniform(rng) * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (d2(i) > 0.0 && acc > target) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {
                for (Eigen::Index i = n - 1; i >= 0; --i) {
                    if (d2(i) > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            // Every point coincides with a center already; fall back to the
            // first unused index.
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(c) = x.row(pick);
        chosen[static_cast<std::size_t>(pick)] = 1;
        d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

void assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers, std::vector<int>& labels) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centers.rows(); ++c) {
            const double d = (x.row(i) - centers.row(c)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(i)] = best;
    }
}

// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(const Eigen::MatrixXd& x, Eigen::MatrixXd& centers, std::vector<int>& labels) {
    const int k = static_cast<int>(centers.rows());
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) continue;
        Eigen::Index far = -1;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const int l = labels[static_cast<std::size_t>(i)];
            if (sizes[static_cast<std::size_t>(l)] < 2) continue;
            const double d = (x.row(i) - centers.row(l)).squaredNorm();
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far < 0) break;  // unreachable while n >= k
        --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
        labels[static_cast<std::size_t>(far)] = c;
        sizes[static_cast<std::size_t>(c)] = 1;
        centers.row(c) = x.row(far);
    }
}

Eigen::MatrixXd centroids(const Eigen::MatrixXd& x, const std::vector<int>& labels, int k) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        sums.row(l) += x.row(i);
        counts(l) += 1.0;
    }
    for (int c = 0; c < k; ++c) {
        if (counts(c) > 0.0) sums.row(c) /= counts(c);
    }
    return sums;
}

Restart lloyd(const Eigen::MatrixXd& x, int k, const KMeansOptions& opts, std::uint64_t stream) {
    std::mt19937_64 rng(splitmix64(opts.seed ^ splitmix64(stream)));
    Eigen::MatrixXd centers = seed_centers(x, k, rng);
    Restart r;
    r.labels.assign(static_cast<std::size_t>(x.rows()), 0);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        assign(x, centers, r.labels);
        repair_empty(x, centers, r.labels);
        Eigen::MatrixXd next = centroids(x, r.labels, k);
        const double shift = (next - centers).rowwise().norm().maxCoeff();
        centers = std::move(next);
        if (shift <= opts.tolerance) break;
    }
    r.wcss = within_cluster_ss(x, r.labels);
    return r;
}

std::vector<int> relabel_by_first_appearance(const std::vector<int>& labels) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
        out[i] = it->second;
    }
    return out;
}

double choose2(double v) { return v * (v - 1.0) / 2.0; }

}  // namespace

double within_cluster_ss(const Eigen::MatrixXd& points, std::span<const int> labels) {
    if (labels.empty()) return 0.0;
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    const Eigen::MatrixXd c = centroids(points, std::vector<int>(labels.begin(), labels.end()), k);
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        total += (points.row(i) - c.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    return total;
}

ClusterAssignment assignment_from_labels(std::span<const int> labels, int k) {
    ClusterAssignment a;
    a.labels.assign(labels.begin(), labels.end());
    a.clusters.assign(static_cast<std::size_t>(k), {});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= k) throw Error(ErrorKind::Assignment, "label out of range");
        a.clusters[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
    }
    return a;
}

ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& opts) {
    if (k < 1 || points.rows() < k) throw Error(ErrorKind::Parameter, "k-means needs 1 <= k <= n");
    if (opts.restarts < 1 || opts.max_iterations < 1) {
        throw Error(ErrorKind::Parameter, "k-means needs at least one restart and iteration");
    }
    Restart best;
    for (int r = 0; r < opts.restarts; ++r) {
        Restart cand = lloyd(points, k, opts, static_cast<std::uint64_t>(r));
        if (cand.wcss < best.wcss) best = std::move(cand);
    }
    if (!std::isfinite(best.wcss)) throw Error(ErrorKind::Numeric, "k-means produced a non-finite objective");
    return assignment_from_labels(relabel_by_first_appearance(best.labels), k);
}

ClusterAssignment spectral_cluster(const AffinityMatrix& w, int k, const SpectralOptions& opts) {
    if (w.n() < 1 || k < 1 || k > w.n()) throw Error(ErrorKind::Parameter, "spectral clustering needs 1 <= k <= n");
    const auto lap = build_laplacian(w, opts.variant);
    auto emb = spectral_embedding(lap, k);
    if (opts.row_normalize) {
        for (Eigen::Index i = 0; i < emb.vectors.rows(); ++i) {
            const double norm = emb.vectors.row(i).norm();
            if (norm > 0.0) emb.vectors.row(i) /= norm;
        }
    }
    return kmeans(emb.vectors, k, opts.kmeans);
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::Shape, "label vectors differ in length");
    const double n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows;
    std::map<int, double> cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    double index = 0.0;
    for (const auto& [_, v] : table) index += choose2(v);
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (const auto& [_, v] : rows) sum_a += choose2(v);
    for (const auto& [_, v] : cols) sum_b += choose2(v);
    const double pairs = choose2(n);
    if (pairs == 0.0) return 1.0;
    const double expected = sum_a * sum_b / pairs;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

}  // namespace scesame
