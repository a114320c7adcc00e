#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "serene/graph.hpp"
#include "serene/types.hpp"

namespace serene {

// ---------------------------------------------------------------- EigenTrust

struct EigenTrustParams {
    /// Flag a worker when its trust is below tau / n.
    double tau = 0.1;
    double tolerance = 1e-6;
    int max_iters = 1000;
    /// Weight of the (uniform) pre-trusted vector in each iteration.
    double damping = 0.0;
};

struct EigenTrustResult {
    std::vector<double> trust;  // sums to 1
    WorkerSet flagged;
    bool converged = false;
    int iterations = 0;
};

/// Global trust by power iteration over row-normalised agreement weights.
/// No-edge pairs contribute nothing; a worker agreeing with nobody trusts
/// everyone uniformly. On non-convergence, workers whose agreement row sum
/// is below tau times the mean row sum are flagged instead.
EigenTrustResult eigentrust(const SimilarityGraph& g, const EigenTrustParams& params = {});

// ----------------------------------------------------------------------- MCL

struct MclParams {
    double inflation = 2.0;
    int expansion = 2;
    double self_loop = 1.0;
    double prune = 1e-7;
    double tolerance = 1e-9;
    int max_iters = 200;
    /// Drop off-diagonal edges lighter than the mean off-diagonal weight
    /// before clustering. Dense agreement graphs do not split otherwise.
    bool sparsify_below_mean = true;
};

/// Zeroes off-diagonal entries below the mean off-diagonal entry.
Eigen::MatrixXd sparsify_below_mean(const Eigen::MatrixXd& adjacency);

/// Markov clustering of a symmetric non-negative adjacency matrix. Returns
/// clusters of row indices, each sorted, ordered by smallest member.
std::vector<std::vector<std::size_t>> mcl(const Eigen::MatrixXd& adjacency, const MclParams& params = {});

// ---------------------------------------------------------------- Spectral

struct Bisection {
    std::vector<std::size_t> positive;
    std::vector<std::size_t> rest;
    Eigen::VectorXd fiedler;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
};

/// Sign split of the Fiedler vector of the graph Laplacian. Fails when the
/// second eigenvalue is degenerate (no preferred cut, e.g. a uniform complete
/// graph) or when one side would be empty.
std::optional<Bisection> spectral_bisect(const Eigen::MatrixXd& adjacency, double degeneracy_tol = 1e-6);

// --------------------------------------------------------------- 1-D k-means

struct KMeans1D {
    /// 1 = higher-centre cluster, 0 = lower.
    std::vector<int> label;
    double low_center = 0.0;
    double high_center = 0.0;
    int iterations = 0;
    /// All inputs equal: everything is labelled 0.
    bool degenerate = false;
};

/// K = 2 Lloyd iteration seeded at min and max; converges to a fixed point.
KMeans1D kmeans_1d(std::span<const double> values);

/// Dense adjacency over `members` (weights of no-edge pairs are 0).
Eigen::MatrixXd adjacency_of(const SimilarityGraph& g, std::span<const WorkerId> members);

}  // namespace serene
