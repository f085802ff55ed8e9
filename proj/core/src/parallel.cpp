#include "okp/parallel.hpp"

namespace okp {

unsigned resolve_threads(ExecOptions exec) noexcept {
    if (exec.threads != 0) return exec.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace okp
