#include "tastediv/divcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

#include "tastediv/kernels.hpp"

namespace tastediv::divcore {

DistanceMatrix cosine_distance_matrix(const ConsumptionMatrix& cm) {
    const std::size_t n = cm.n_categories();
    const std::size_t m = cm.n_users();
    if (n < 2)
        throw std::invalid_argument("cosine_distance_matrix: need at least 2 categories");

    // Transpose so each category column is contiguous for the dot kernel.
    std::vector<double> cols(n * m);
    for (std::size_t u = 0; u < m; ++u)
        for (std::size_t c = 0; c < n; ++c)
            cols[c * m + u] = cm.proportions[u * n + c];

    std::vector<double> norms(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::span<const double> col(cols.data() + c * m, m);
        norms[c] = std::sqrt(kernels::dot(col, col));
        if (norms[c] == 0.0)
            throw std::runtime_error("cosine_distance_matrix: category '" +
                                     cm.categories[c] + "' has no consumption");
    }

    DistanceMatrix out;
    out.categories = cm.categories;
    out.d.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> ci(cols.data() + i * m, m);
        for (std::size_t j = i + 1; j < n; ++j) {
            std::span<const double> cj(cols.data() + j * m, m);
            const double cosine = kernels::dot(ci, cj) / (norms[i] * norms[j]);
            const double dist = std::clamp(1.0 - cosine, 0.0, 1.0);
            out.at(i, j) = dist;
            out.at(j, i) = dist;
        }
    }
    return out;
}

double rao_stirling(std::span<const double> p, const DistanceMatrix& d) {
    if (p.size() != d.size())
        throw std::invalid_argument("rao_stirling: proportion vector has " +
                                    std::to_string(p.size()) + " entries, distance matrix has " +
                                    std::to_string(d.size()));
    return kernels::pair_weighted_sum(p, d.d);
}

double shannon_entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

long volume(std::span<const double> p, double eps) {
    long n = 0;
    for (double v : p)
        if (v > eps) ++n;
    return n;
}

std::vector<DiversityReport> diversity_batch(const ConsumptionMatrix& cm,
                                             const DistanceMatrix& d) {
    if (cm.categories != d.categories)
        throw std::invalid_argument("diversity_batch: category ordering mismatch");
    std::vector<DiversityReport> out;
    out.reserve(cm.n_users());
    for (std::size_t u = 0; u < cm.n_users(); ++u) {
        std::span<const double> p = cm.row(u);
        DiversityReport r;
        r.user_id = cm.users[u];
        r.rao_stirling = rao_stirling(p, d);
        r.entropy = shannon_entropy(p);
        r.volume = volume(p);
        out.push_back(std::move(r));
    }
    return out;
}

MdsEmbedding classical_mds(const DistanceMatrix& d, int dims) {
    const std::size_t n = d.size();
    if (n < 3)
        throw std::invalid_argument("classical_mds: need at least 3 categories");
    if (dims < 1 || static_cast<std::size_t>(dims) > n)
        throw std::invalid_argument("classical_mds: invalid dimension count");

    // B = -1/2 J D^2 J with J = I - 11'/n (double centering of squared
    // distances).
    Eigen::MatrixXd sq(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sq(i, j) = d.at(i, j) * d.at(i, j);
    const Eigen::VectorXd row_mean = sq.rowwise().mean();
    const double grand_mean = sq.mean();
    Eigen::MatrixXd b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - row_mean(j) + grand_mean);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("classical_mds: eigendecomposition failed");

    MdsEmbedding out;
    out.categories = d.categories;
    out.coords.assign(n * static_cast<std::size_t>(dims), 0.0);
    out.eigenvalues.resize(dims);

    const double lambda_max = solver.eigenvalues()(static_cast<Eigen::Index>(n) - 1);
    const double eps = 1e-12 * std::max(std::abs(lambda_max), 1.0);
    for (int k = 0; k < dims; ++k) {
        // Eigen reports eigenvalues in ascending order; walk from the back.
        const Eigen::Index col = static_cast<Eigen::Index>(n) - 1 - k;
        const double lambda = solver.eigenvalues()(col);
        out.eigenvalues[k] = lambda;
        if (lambda <= eps) continue;  // axis unavailable, coordinates stay 0
        ++out.positive_axes;
        Eigen::VectorXd axis = solver.eigenvectors().col(col) * std::sqrt(lambda);

        // Deterministic sign: largest-magnitude coordinate points positive.
        Eigen::Index peak = 0;
        axis.cwiseAbs().maxCoeff(&peak);
        if (axis(peak) < 0.0) axis = -axis;

        for (std::size_t i = 0; i < n; ++i)
            out.coords[i * static_cast<std::size_t>(dims) + static_cast<std::size_t>(k)] =
                axis(static_cast<Eigen::Index>(i));
    }
    out.warning = out.positive_axes < dims;
    return out;
}

}  // namespace tastediv::divcore
