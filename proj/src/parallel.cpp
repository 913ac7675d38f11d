#include "besov_mkv/parallel.hpp"

#include <atomic>

namespace besov_mkv {

namespace {
std::atomic<int> g_threads{1};
}

int thread_count() { return g_threads.load(); }
void set_thread_count(int n) { g_threads.store(std::max(1, n)); }

}  // namespace besov_mkv
