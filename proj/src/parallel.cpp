#include "bandgen/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace bandgen {

namespace {
std::atomic<int> g_workers{1};
}

void set_num_workers(int workers)
{
    g_workers.store(std::max(1, workers));
}

int num_workers() noexcept
{
    return g_workers.load();
}

} // namespace bandgen
