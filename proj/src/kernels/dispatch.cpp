#include <atomic>
#include <cstdlib>
#include <string>

#include "amlgnn/kernels.hpp"

namespace amlgnn::kernels {

namespace {

const KernelTable* initial() {
  if (const char* env = std::getenv("AMLGNN_KERNELS")) {
    if (std::string_view(env) == "scalar") return &scalar_table();
  }
  if (const auto* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{initial()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  if (name == "scalar") {
    slot().store(&scalar_table(), std::memory_order_release);
    return true;
  }
  if (name == "avx2") {
    if (const auto* t = avx2_table()) {
      slot().store(t, std::memory_order_release);
      return true;
    }
  }
  return false;
}

}  // namespace amlgnn::kernels
