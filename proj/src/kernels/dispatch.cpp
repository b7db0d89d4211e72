#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hamlearn/kernels.hpp"

namespace hamlearn::kernels {
namespace {

bool detect_avx2() {
#if defined(HAMLEARN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool cpu_has_avx2() {
  static const bool has = detect_avx2();
  return has;
}

Backend initial_backend() {
  if (const char* env = std::getenv("HAMLEARN_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return Backend::kScalar;
    if (want == "avx2" && cpu_has_avx2()) return Backend::kAvx2;
  }
  return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

const KernelTable& lookup(Backend b) {
#if defined(HAMLEARN_HAVE_AVX2)
  if (b == Backend::kAvx2) return avx2_table();
#endif
  return scalar_table();
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

std::atomic<const KernelTable*>& current_table() {
  static std::atomic<const KernelTable*> t{&lookup(current().load())};
  return t;
}

}  // namespace

bool backend_supported(Backend b) {
  return b == Backend::kScalar || (b == Backend::kAvx2 && cpu_has_avx2());
}

const KernelTable& table(Backend b) {
  if (!backend_supported(b)) {
    throw std::invalid_argument("kernel backend not supported on this CPU: " +
                                std::string(backend_name(b)));
  }
  return lookup(b);
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& active() { return *current_table().load(std::memory_order_relaxed); }

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw std::invalid_argument("kernel backend not supported on this CPU: " +
                                std::string(backend_name(b)));
  }
  current().store(b, std::memory_order_relaxed);
  current_table().store(&lookup(b), std::memory_order_relaxed);
}

}  // namespace hamlearn::kernels
