#pragma once

#include <span>
#include <string>
#include <vector>

#include "tastediv/ingest.hpp"

namespace tastediv::divcore {

using ingest::ConsumptionMatrix;

// Symmetric category-to-category distances in [0,1]; order matches the
// ConsumptionMatrix the grid was built from.
struct DistanceMatrix {
    std::vector<std::string> categories;
    std::vector<double> d;  // n x n row-major

    std::size_t size() const { return categories.size(); }
    double at(std::size_t i, std::size_t j) const { return d[i * size() + j]; }
    double& at(std::size_t i, std::size_t j) { return d[i * size() + j]; }
};

// d(i,j) = 1 - cos(column_i, column_j) over the consumption columns, clamped
// to [0,1]. Throws when the matrix has fewer than two categories or a column
// is all-zero.
DistanceMatrix cosine_distance_matrix(const ConsumptionMatrix& cm);

// Full ordered double sum  sum_{i,j} p_i p_j d(i,j)  (i = j contributes 0).
double rao_stirling(std::span<const double> p, const DistanceMatrix& d);

// -sum p_i ln p_i over strictly positive entries, in nats.
double shannon_entropy(std::span<const double> p);

// Count of entries strictly greater than eps.
long volume(std::span<const double> p, double eps = 0.0);

struct DiversityReport {
    std::string user_id;
    double rao_stirling = 0.0;
    double entropy = 0.0;
    long volume = 0;
};

std::vector<DiversityReport> diversity_batch(const ConsumptionMatrix& cm,
                                             const DistanceMatrix& d);

struct MdsEmbedding {
    std::vector<std::string> categories;
    std::vector<double> coords;       // n x dims row-major, centered per axis
    std::vector<double> eigenvalues;  // top-dims, descending
    int positive_axes = 0;
    bool warning = false;  // fewer than dims positive eigenvalues
};

// Torgerson double centering of squared distances, top-`dims` eigenpairs of
// the resulting Gram matrix. Axis signs are fixed so the largest-magnitude
// coordinate on each axis is positive. Requires at least 3 categories.
MdsEmbedding classical_mds(const DistanceMatrix& d, int dims = 2);

}  // namespace tastediv::divcore
