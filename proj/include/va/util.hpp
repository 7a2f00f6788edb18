#pragma once

#include <cstdio>
#include <string>
#include <thread>
#include <vector>

namespace va {

// Runs f(i) for i in [0, n). With threads > 1 the range is split into
// contiguous chunks; f must only write to per-index state so results do not
// depend on the thread count.
template <typename F>
void parallel_for(int n, int threads, F&& f) {
    if (threads <= 1 || n < 2) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    int t = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(t));
    int chunk = (n + t - 1) / t;
    for (int ti = 0; ti < t; ++ti) {
        int lo = ti * chunk;
        int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (int i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Shortest round-trip decimal formatting for doubles; keeps CSV output
// byte-stable across runs.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        for (int prec = 1; prec <= 16; ++prec) {
            char b2[32];
            std::snprintf(b2, sizeof(b2), "%.*g", prec, v);
            if (std::strtod(b2, nullptr) == v) return b2;
        }
    }
    return buf;
}

} // namespace va
