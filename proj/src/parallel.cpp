#include "spinglass/parallel.hpp"

#include <atomic>

namespace spinglass {

namespace {
std::atomic<int> g_workers{1};
}

int worker_count() { return g_workers.load(); }

void set_worker_count(int n) { g_workers.store(n < 1 ? 1 : n); }

}  // namespace spinglass
