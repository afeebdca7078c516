#include "elflow/operators.hpp"

#include <atomic>

namespace elflow::testing {

namespace {
std::atomic<bool> g_stencil_fault{false};
}

void set_stencil_fault(bool on) { g_stencil_fault.store(on); }
bool stencil_fault() { return g_stencil_fault.load(std::memory_order_relaxed); }

}  // namespace elflow::testing
