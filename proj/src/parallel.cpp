#include "idcnn/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace idcnn {
namespace {

ExecutionPolicy& policy_storage() {
    static ExecutionPolicy policy{default_thread_count(), true};
    return policy;
}

} // namespace

unsigned default_thread_count() {
    if (const char* env = std::getenv("IDCNN_THREADS")) {
        try {
            const int value = std::stoi(env);
            if (value > 0) return static_cast<unsigned>(value);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

ExecutionPolicy execution_policy() { return policy_storage(); }

void set_execution_policy(ExecutionPolicy policy) {
    policy.threads = std::max(1u, policy.threads);
    policy_storage() = policy;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(policy_storage().threads, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        const std::size_t begin = count * t / workers;
        const std::size_t end = count * (t + 1) / workers;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& thread : pool) thread.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace idcnn
