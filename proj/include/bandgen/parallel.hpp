#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bandgen {

/// Execution policy for the per-item kernels. Serial is the reference path;
/// Parallel must produce bit-identical results.
enum class Exec { Serial, Parallel };

/// Thread count used by Exec::Parallel regions (1 keeps runs single-threaded).
void set_num_workers(int workers);
int num_workers() noexcept;

/// Runs f(i) for i in [0, n). Items must write only to their own slots.
/// The first exception thrown by any item is rethrown after the loop.
template <typename F>
void for_each_index(std::size_t n, Exec exec, F&& f)
{
    if (exec == Exec::Serial || num_workers() <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(num_workers())
    for (long long i = 0; i < count; ++i) {
        try {
            f(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error)
                error = std::current_exception();
        }
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace bandgen
