#include "agepde/reduce.hpp"
#include "agepde/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace agepde {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonIntegerStepRatio: return "NonIntegerStepRatio";
        case ErrorCode::InvalidDimension: return "InvalidDimension";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::RectOffGrid: return "RectOffGrid";
        case ErrorCode::MissingContext: return "MissingContext";
        case ErrorCode::TraceFlagMissing: return "TraceFlagMissing";
        case ErrorCode::LinearSolveDiverged: return "LinearSolveDiverged";
        case ErrorCode::StiffSourceStep: return "StiffSourceStep";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::FluxMismatch: return "FluxMismatch";
        case ErrorCode::BreakpointOffGrid: return "BreakpointOffGrid";
        case ErrorCode::PowerIterationStalled: return "PowerIterationStalled";
        case ErrorCode::MissingKey: return "MissingKey";
        case ErrorCode::UnknownKey: return "UnknownKey";
        case ErrorCode::TypeError: return "TypeError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

namespace {

constexpr std::size_t kLeaf = 16;

double sum_range(const double* p, std::size_t n) {
    if (n <= kLeaf) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p[i];
        return s;
    }
    std::size_t half = n / 2;
    return sum_range(p, half) + sum_range(p + half, n - half);
}

double dot_range(const double* a, const double* b, std::size_t n) {
    if (n <= kLeaf) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    }
    std::size_t half = n / 2;
    return dot_range(a, b, half) + dot_range(a + half, b + half, n - half);
}

}  // namespace

double tree_sum(std::span<const double> v) { return sum_range(v.data(), v.size()); }

double tree_dot(std::span<const double> a, std::span<const double> b) {
    return dot_range(a.data(), b.data(), std::min(a.size(), b.size()));
}

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("AGEPDE_THREADS")) {
        try {
            long cap = std::stol(env);
            if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
        } catch (...) {
        }
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    unsigned workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        }
    };
    for (unsigned w = 0; w + 1 < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace agepde
