#include "grr/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace grr {

int thread_count() {
    static const int cached = [] {
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        if (const char* env = std::getenv("GRR_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, hw));
        }
        return static_cast<int>(hw);
    }();
    return cached;
}

std::size_t fixed_chunks(std::size_t total) {
    // 64 chunks regardless of thread count keeps the partial-sum tree shape
    // fixed; small totals collapse to one element per chunk.
    if (total == 0) return 0;
    return std::min<std::size_t>(total, 64);
}

void parallel_chunks(std::size_t total,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    const std::size_t chunks = fixed_chunks(total);
    if (chunks == 0) return;
    const int threads = std::min<int>(thread_count(), static_cast<int>(chunks));

    auto run_chunk = [&](std::size_t c) {
        std::size_t begin = total * c / chunks;
        std::size_t end = total * (c + 1) / chunks;
        body(c, begin, end);
    };

    if (threads <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t c = static_cast<std::size_t>(t); c < chunks; c += threads) run_chunk(c);
        });
    }
    for (auto& th : pool) th.join();
}

double parallel_sum(std::size_t total, const std::function<double(std::size_t)>& f) {
    const std::size_t chunks = fixed_chunks(total);
    std::vector<KahanSum> partial(chunks);
    parallel_chunks(total, [&](std::size_t c, std::size_t begin, std::size_t end) {
        KahanSum acc;
        for (std::size_t i = begin; i < end; ++i) acc.add(f(i));
        partial[c] = acc;
    });
    KahanSum out;
    for (const auto& p : partial) out.add(p.sum);
    return out.sum;
}

} // namespace grr
