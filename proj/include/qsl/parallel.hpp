// Copyright 2026 The qsl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qsl {

/// Number of workers used when the caller passes 0.
inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// out[i] = fn(in[i]), evaluated on a small thread pool. Output order always
/// matches input order, so results do not depend on scheduling. The first
/// exception thrown by any task is rethrown on the calling thread.
template <typename T, typename Fn>
auto parallel_map(const std::vector<T>& in, Fn fn, unsigned workers = 0)
    -> std::vector<decltype(fn(in.front()))> {
    using R = decltype(fn(in.front()));
    std::vector<R> out(in.size());
    if (in.empty()) {
        return out;
    }
    if (workers == 0) {
        workers = default_workers();
    }
    workers = std::min<unsigned>(workers, static_cast<unsigned>(in.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < in.size(); ++i) {
            out[i] = fn(in[i]);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= in.size()) {
                return;
            }
            try {
                out[i] = fn(in[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(in.size());
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

} // namespace qsl
