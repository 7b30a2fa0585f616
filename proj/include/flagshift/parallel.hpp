#pragma once

#include <cstddef>
#include <exception>
#include <utility>
#include <vector>

namespace flagshift {

enum class Exec { serial, parallel };

// Fills out[i] = f(i) for i in [0, count). The parallel path writes disjoint
// slots of a preallocated vector, so it returns bit-identical results to the
// serial path regardless of thread count. If f throws, the exception from the
// lowest index is rethrown once all threads have stopped.
template <typename T, typename F>
std::vector<T> map_indexed(std::size_t count, F&& f, Exec exec = Exec::parallel) {
    std::vector<T> out(count);
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
        return out;
    }
    std::exception_ptr err = nullptr;
    std::size_t err_index = count;
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(count); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        try {
            out[i] = f(i);
        } catch (...) {
#pragma omp critical(flagshift_map_indexed_err)
            if (i < err_index) {
                err_index = i;
                err = std::current_exception();
            }
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace flagshift
