#include "mvsde/parallel.hpp"

#include <exception>
#include <thread>
#include <vector>

namespace mvsde {

int default_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t w = workers <= 1 ? 1 : static_cast<std::size_t>(workers);
    if (w > n) w = n;
    if (w == 1) {
        fn(0, n);
        return;
    }

    const std::size_t chunk = (n + w - 1) / w;
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = begin + chunk < n ? begin + chunk : n;
        threads.emplace_back([&, t, begin, end] {
            try {
                if (begin < end) fn(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace mvsde
