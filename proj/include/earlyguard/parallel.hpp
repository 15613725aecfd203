#pragma once

#include <atomic>
#include <exception>
#include <mutex>

namespace earlyguard::detail {

/// Collects the first exception thrown inside an OpenMP loop body so it can
/// be rethrown after the region instead of terminating the process.
class OmpExceptionGuard {
public:
    bool skip() const { return failed_.load(std::memory_order_relaxed); }

    void capture() {
        std::lock_guard<std::mutex> lock(m_);
        if (!eptr_) eptr_ = std::current_exception();
        failed_.store(true, std::memory_order_relaxed);
    }

    void rethrow_if_any() const {
        if (eptr_) std::rethrow_exception(eptr_);
    }

private:
    std::atomic<bool> failed_{false};
    std::exception_ptr eptr_;
    std::mutex m_;
};

}  // namespace earlyguard::detail
