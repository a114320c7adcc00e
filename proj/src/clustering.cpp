#include "serene/clustering.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace serene {

EigenTrustResult eigentrust(const SimilarityGraph& g, const EigenTrustParams& params) {
    const auto n = g.size();
    EigenTrustResult out;
    if (n == 0) {
        out.converged = true;
        return out;
    }

    // Row-stochastic local trust matrix.
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd row_sums(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !g.has_edge(WorkerId(i), WorkerId(j))) continue;
            const double w = g.weight(WorkerId(i), WorkerId(j));
            c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
            sum += w;
        }
        row_sums(static_cast<Eigen::Index>(i)) = sum;
        if (sum > 0.0) {
            c.row(static_cast<Eigen::Index>(i)) /= sum;
        } else {
            c.row(static_cast<Eigen::Index>(i)).setConstant(1.0 / static_cast<double>(n));
        }
    }

    const Eigen::VectorXd pre = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
    Eigen::VectorXd t = pre;
    const Eigen::MatrixXd ct = c.transpose();
    for (out.iterations = 1; out.iterations <= params.max_iters; ++out.iterations) {
        Eigen::VectorXd next = (1.0 - params.damping) * (ct * t) + params.damping * pre;
        const double s = next.sum();
        if (s > 0.0) next /= s;
        const double delta = (next - t).lpNorm<1>();
        t = std::move(next);
        if (delta < params.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.iterations = std::min(out.iterations, params.max_iters);

    out.trust.assign(t.data(), t.data() + n);
    const double threshold = params.tau / static_cast<double>(n);
    if (out.converged) {
        for (std::size_t i = 0; i < n; ++i)
            if (out.trust[i] < threshold) out.flagged.emplace_back(i);
    } else {
        const double mean = row_sums.mean();
        for (std::size_t i = 0; i < n; ++i)
            if (row_sums(static_cast<Eigen::Index>(i)) < params.tau * mean) out.flagged.emplace_back(i);
    }
    return out;
}

namespace {

void normalize_columns(Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double s = m.col(j).sum();
        if (s > 0.0) m.col(j) /= s;
    }
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

Eigen::MatrixXd sparsify_below_mean(const Eigen::MatrixXd& adjacency) {
    const auto n = adjacency.rows();
    if (n < 2) return adjacency;
    const double mean = (adjacency.sum() - adjacency.trace()) / static_cast<double>(n * (n - 1));
    Eigen::MatrixXd out = adjacency;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && out(i, j) < mean) out(i, j) = 0.0;
    return out;
}

std::vector<std::vector<std::size_t>> mcl(const Eigen::MatrixXd& adjacency, const MclParams& params) {
    const auto n = static_cast<std::size_t>(adjacency.rows());
    if (n == 0) return {};

    Eigen::MatrixXd m = params.sparsify_below_mean ? sparsify_below_mean(adjacency.cwiseMax(0.0))
                                                   : adjacency.cwiseMax(0.0);
    m.diagonal().array() += params.self_loop;
    normalize_columns(m);

    for (int iter = 0; iter < params.max_iters; ++iter) {
        Eigen::MatrixXd expanded = m;
        for (int e = 1; e < params.expansion; ++e) expanded = expanded * m;
        expanded = expanded.array().pow(params.inflation).matrix();
        expanded = (expanded.array() < params.prune).select(0.0, expanded);
        normalize_columns(expanded);
        const double change = (expanded - m).cwiseAbs().maxCoeff();
        m = std::move(expanded);
        if (change < params.tolerance) break;
    }

    // Every column flows to its strongest rows (ties within rounding, as in
    // a uniform clique); link each node to them and read clusters off the
    // connected components.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t j = 0; j < n; ++j) {
        const auto col = m.col(static_cast<Eigen::Index>(j));
        const double top = col.maxCoeff();
        for (std::size_t r = 0; r < n; ++r) {
            if (col(static_cast<Eigen::Index>(r)) < top * (1.0 - 1e-6)) continue;
            const auto a = find_root(parent, j);
            const auto b = find_root(parent, r);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }

    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::ptrdiff_t> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = find_root(parent, i);
        if (slot[r] < 0) {
            slot[r] = static_cast<std::ptrdiff_t>(clusters.size());
            clusters.emplace_back();
        }
        clusters[static_cast<std::size_t>(slot[r])].push_back(i);
    }
    return clusters;
}

std::optional<Bisection> spectral_bisect(const Eigen::MatrixXd& adjacency, double degeneracy_tol) {
    const auto n = adjacency.rows();
    if (n < 2) return std::nullopt;

    Eigen::MatrixXd w = adjacency;
    w.diagonal().setZero();
    Eigen::MatrixXd laplacian = -w;
    laplacian.diagonal() = w.rowwise().sum();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success) return std::nullopt;
    const auto& values = solver.eigenvalues();

    Bisection b;
    b.lambda2 = values(1);
    b.lambda3 = n > 2 ? values(2) : values(1);
    const double scale = std::max(1.0, std::abs(values(n - 1)));
    if (n > 2 && (b.lambda3 - b.lambda2) < degeneracy_tol * scale) return std::nullopt;

    b.fiedler = solver.eigenvectors().col(1);
    // Fix the eigenvector's arbitrary sign: the largest-magnitude entry is positive.
    Eigen::Index pivot = 0;
    b.fiedler.cwiseAbs().maxCoeff(&pivot);
    if (b.fiedler(pivot) < 0) b.fiedler = -b.fiedler;

    for (Eigen::Index i = 0; i < n; ++i) {
        if (b.fiedler(i) > 0.0) {
            b.positive.push_back(static_cast<std::size_t>(i));
        } else {
            b.rest.push_back(static_cast<std::size_t>(i));
        }
    }
    if (b.positive.empty() || b.rest.empty()) return std::nullopt;
    return b;
}

KMeans1D kmeans_1d(std::span<const double> values) {
    KMeans1D out;
    out.label.assign(values.size(), 0);
    if (values.empty()) {
        out.degenerate = true;
        return out;
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    out.low_center = *lo;
    out.high_center = *hi;
    if (*lo == *hi) {
        out.degenerate = true;
        return out;
    }

    // In 1-D each Lloyd step moves the split point monotonically, so the
    // loop terminates within values.size() iterations.
    for (std::size_t iter = 0; iter <= values.size(); ++iter) {
        ++out.iterations;
        bool changed = false;
        for (std::size_t i = 0; i < values.size(); ++i) {
            // Ties go to the lower cluster.
            const int lab = std::abs(values[i] - out.high_center) < std::abs(values[i] - out.low_center) ? 1 : 0;
            changed = changed || lab != out.label[i];
            out.label[i] = lab;
        }
        double sum[2] = {0.0, 0.0};
        int cnt[2] = {0, 0};
        for (std::size_t i = 0; i < values.size(); ++i) {
            sum[out.label[i]] += values[i];
            ++cnt[out.label[i]];
        }
        if (cnt[0] > 0) out.low_center = sum[0] / cnt[0];
        if (cnt[1] > 0) out.high_center = sum[1] / cnt[1];
        if (!changed && iter > 0) break;
    }
    return out;
}

Eigen::MatrixXd adjacency_of(const SimilarityGraph& g, std::span<const WorkerId> members) {
    const auto m = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            if (i != j)
                a(i, j) = g.weight(members[static_cast<std::size_t>(i)], members[static_cast<std::size_t>(j)]);
    return a;
}

}  // namespace serene
