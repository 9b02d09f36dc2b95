#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Numeric inner loops shared by the pipeline. Every kernel has a scalar
// reference implementation and, on x86-64 builds that support it, an AVX2
// variant selected at runtime. The AVX2 variants keep per-element arithmetic
// bit-identical to scalar (no FMA contraction); only reduction order differs.

namespace tastediv::kernels {

enum class Backend { Scalar, Avx2 };

// Backend chosen for subsequent kernel calls. Auto-detected on first use;
// the TASTEDIV_KERNELS environment variable ("scalar" or "avx2") overrides
// detection, and set_backend() overrides both.
Backend active_backend();
void set_backend(Backend b);  // throws if the backend is unavailable
void reset_backend();         // return to auto-detection
std::string_view backend_name(Backend b);

// True when AVX2 kernels are both compiled in and supported by this CPU.
bool avx2_available();

// Inner product of two equal-length vectors.
double dot(std::span<const double> a, std::span<const double> b);

// Full ordered double sum  sum_i sum_j  p[i] * p[j] * d[i*n + j]
// over an n x n row-major grid d, n == p.size().
double pair_weighted_sum(std::span<const double> p, std::span<const double> d);

struct NearestHit {
    std::size_t index;
    double sq_dist;
};

// Index of the point (xs[i], ys[i], zs[i]) with minimal squared Euclidean
// distance to (px, py, pz). Ties resolve to the lowest index. Empty input
// yields {SIZE_MAX, +inf}.
NearestHit nearest_point3(double px, double py, double pz,
                          std::span<const double> xs,
                          std::span<const double> ys,
                          std::span<const double> zs);

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
double pair_weighted_sum_scalar(const double* p, const double* d, std::size_t n);
NearestHit nearest_point3_scalar(double px, double py, double pz,
                                 const double* xs, const double* ys,
                                 const double* zs, std::size_t n);

#if defined(TASTEDIV_KERNELS_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
double pair_weighted_sum_avx2(const double* p, const double* d, std::size_t n);
NearestHit nearest_point3_avx2(double px, double py, double pz,
                               const double* xs, const double* ys,
                               const double* zs, std::size_t n);
#endif

}  // namespace detail

}  // namespace tastediv::kernels
