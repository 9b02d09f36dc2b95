// AVX2 kernel variants. This translation unit is compiled with -mavx2 and
// without -mfma: per-element arithmetic must stay bit-identical to the scalar
// reference so that nearest_point3 tie-breaking agrees exactly across
// backends. Reductions (dot, pair_weighted_sum) differ from scalar only in
// summation order.

#include "tastediv/kernels.hpp"

#if defined(TASTEDIV_KERNELS_AVX2)

#include <immintrin.h>

#include <limits>

namespace tastediv::kernels::detail {

namespace {

inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                                 _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                                 _mm256_loadu_pd(b + i + 4)));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                                 _mm256_loadu_pd(b + i)));
    }
    double acc = hsum256(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double pair_weighted_sum_avx2(const double* p, const double* d, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += p[i] * dot_avx2(d + i * n, p, n);
    }
    return total;
}

NearestHit nearest_point3_avx2(double px, double py, double pz,
                               const double* xs, const double* ys,
                               const double* zs, std::size_t n) {
    NearestHit best{std::numeric_limits<std::size_t>::max(),
                    std::numeric_limits<double>::infinity()};
    const __m256d vpx = _mm256_set1_pd(px);
    const __m256d vpy = _mm256_set1_pd(py);
    const __m256d vpz = _mm256_set1_pd(pz);
    __m256d vbest = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256i vidx = _mm256_set1_epi64x(-1);
    __m256i vcur = _mm256_set_epi64x(3, 2, 1, 0);
    const __m256i vstep = _mm256_set1_epi64x(4);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vpx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vpy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vpz);
        const __m256d sq = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
            _mm256_mul_pd(dz, dz));
        // Strict less-than keeps the first minimum within each lane's stream.
        const __m256d lt = _mm256_cmp_pd(sq, vbest, _CMP_LT_OQ);
        vbest = _mm256_blendv_pd(vbest, sq, lt);
        vidx = _mm256_castpd_si256(_mm256_blendv_pd(
            _mm256_castsi256_pd(vidx), _mm256_castsi256_pd(vcur), lt));
        vcur = _mm256_add_epi64(vcur, vstep);
    }

    alignas(32) double lane_best[4];
    alignas(32) std::int64_t lane_idx[4];
    _mm256_store_pd(lane_best, vbest);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lane_idx), vidx);
    for (int lane = 0; lane < 4; ++lane) {
        if (lane_idx[lane] < 0) continue;
        const auto idx = static_cast<std::size_t>(lane_idx[lane]);
        if (lane_best[lane] < best.sq_dist ||
            (lane_best[lane] == best.sq_dist && idx < best.index)) {
            best.sq_dist = lane_best[lane];
            best.index = idx;
        }
    }

    for (; i < n; ++i) {
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

#endif  // TASTEDIV_KERNELS_AVX2
