#include <em/parallel.hpp>

#include <atomic>
#include <thread>

namespace em {

namespace {
std::atomic<bool> g_parallel{true};
}

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void set_parallel_enabled(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    const unsigned n = std::thread::hardware_concurrency();
    return n ? static_cast<int>(n) : 1;
#endif
}

} // namespace em
