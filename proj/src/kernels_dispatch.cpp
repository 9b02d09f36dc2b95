#include "tastediv/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace tastediv::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(TASTEDIV_KERNELS_AVX2) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

Backend detect_backend() {
    if (const char* env = std::getenv("TASTEDIV_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return Backend::Scalar;
        if (want == "avx2" && cpu_has_avx2()) return Backend::Avx2;
    }
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<int> g_backend{-1};  // -1 = not yet detected

Backend current() {
    int b = g_backend.load(std::memory_order_relaxed);
    if (b < 0) {
        b = static_cast<int>(detect_backend());
        g_backend.store(b, std::memory_order_relaxed);
    }
    return static_cast<Backend>(b);
}

}  // namespace

bool avx2_available() { return cpu_has_avx2(); }

Backend active_backend() { return current(); }

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !cpu_has_avx2())
        throw std::runtime_error("kernels: AVX2 backend not available on this build/CPU");
    g_backend.store(static_cast<int>(b), std::memory_order_relaxed);
}

void reset_backend() { g_backend.store(-1, std::memory_order_relaxed); }

std::string_view backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("kernels::dot: length mismatch");
#if defined(TASTEDIV_KERNELS_AVX2)
    if (current() == Backend::Avx2)
        return detail::dot_avx2(a.data(), b.data(), a.size());
#endif
    return detail::dot_scalar(a.data(), b.data(), a.size());
}

double pair_weighted_sum(std::span<const double> p, std::span<const double> d) {
    if (d.size() != p.size() * p.size())
        throw std::invalid_argument("kernels::pair_weighted_sum: grid is not n*n");
#if defined(TASTEDIV_KERNELS_AVX2)
    if (current() == Backend::Avx2)
        return detail::pair_weighted_sum_avx2(p.data(), d.data(), p.size());
#endif
    return detail::pair_weighted_sum_scalar(p.data(), d.data(), p.size());
}

NearestHit nearest_point3(double px, double py, double pz,
                          std::span<const double> xs,
                          std::span<const double> ys,
                          std::span<const double> zs) {
    if (xs.size() != ys.size() || xs.size() != zs.size())
        throw std::invalid_argument("kernels::nearest_point3: length mismatch");
#if defined(TASTEDIV_KERNELS_AVX2)
    if (current() == Backend::Avx2)
        return detail::nearest_point3_avx2(px, py, pz, xs.data(), ys.data(),
                                           zs.data(), xs.size());
#endif
    return detail::nearest_point3_scalar(px, py, pz, xs.data(), ys.data(),
                                         zs.data(), xs.size());
}

}  // namespace tastediv::kernels
