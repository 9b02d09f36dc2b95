#include "tastediv/kernels.hpp"

#include <limits>

namespace tastediv::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double pair_weighted_sum_scalar(const double* p, const double* d, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = d + i * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * p[j];
        total += p[i] * acc;
    }
    return total;
}

NearestHit nearest_point3_scalar(double px, double py, double pz,
                                 const double* xs, const double* ys,
                                 const double* zs, std::size_t n) {
    NearestHit best{std::numeric_limits<std::size_t>::max(),
                    std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - px;
        const double dy = ys[i] - py;
        const double dz = zs[i] - pz;
        const double sq = dx * dx + dy * dy + dz * dz;
        if (sq < best.sq_dist) {
            best.sq_dist = sq;
            best.index = i;
        }
    }
    return best;
}

}  // namespace tastediv::kernels::detail
