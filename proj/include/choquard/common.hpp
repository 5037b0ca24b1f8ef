#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace choquard {

/// Surface area of the unit sphere S^{d-1} embedded in R^d.
inline double sphere_area(int d) {
    if (d < 1) throw std::invalid_argument("sphere_area: dimension must be >= 1");
    // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2); d=1 gives 2 (two points).
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Volume of the unit ball in R^d.
inline double ball_volume(int d) { return sphere_area(d) / d; }

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per worker.
/// threads <= 1 runs inline. fn must not touch another chunk's output slots.
template <class Fn>
void parallel_for_chunks(std::size_t n, unsigned threads, Fn&& fn) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (threads == 0) threads = hw ? hw : 1;
    if (threads <= 1 || n < 2 * threads) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t b = t * chunk;
        std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace choquard
