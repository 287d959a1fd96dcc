#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace grr {

// Thread count resolved from GRR_THREADS (capped by hardware), >= 1.
int thread_count();

// Compensated (Kahan) accumulator.
struct KahanSum {
    double sum = 0;
    double c = 0;

    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

// Splits [0, total) into a fixed number of chunks that does not depend on the
// thread count, runs `body(chunk_index, begin, end)` possibly in parallel, and
// guarantees chunk indices cover 0..chunks-1.  Callers reduce per-chunk
// results in index order, which makes the reduction value independent of
// scheduling.  Number of chunks is returned before any work is scheduled via
// the sizing callback pattern: use fixed_chunks() to size result buffers.
std::size_t fixed_chunks(std::size_t total);

void parallel_chunks(std::size_t total,
                     const std::function<void(std::size_t chunk, std::size_t begin, std::size_t end)>& body);

// Deterministic parallel sum of f(i) for i in [0, total): per-chunk Kahan
// partials merged in chunk order.  Identical bits for any thread count.
double parallel_sum(std::size_t total, const std::function<double(std::size_t)>& f);

} // namespace grr
