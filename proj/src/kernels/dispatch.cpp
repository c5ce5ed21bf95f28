#include <atomic>
#include <cstdlib>
#include <string>

#include "fwdegen/errors.hpp"
#include "fwdegen/kernels.hpp"

namespace fwdegen::kernels {

#if defined(FWDEGEN_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif

const KernelTable* avx2_table() {
#if defined(FWDEGEN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

Backend parse_backend(std::string_view name) {
  if (name == "auto" || name.empty()) return Backend::automatic;
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  throw ConfigError("unknown kernel backend '" + std::string(name) + "' (expected auto, scalar or avx2)");
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::automatic: return "auto";
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "auto";
}

const KernelTable& table_for(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return scalar_table();
    case Backend::avx2:
      if (const KernelTable* t = avx2_table()) return *t;
      throw ConfigError("avx2 kernels requested but not available on this build or CPU");
    case Backend::automatic:
      break;
  }
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

namespace {

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{[] {
    const char* env = std::getenv("FWDEGEN_KERNELS");
    return &table_for(parse_backend(env ? std::string_view(env) : std::string_view("auto")));
  }()};
  return slot;
}

}  // namespace

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active(Backend backend) { active_slot().store(&table_for(backend), std::memory_order_release); }

}  // namespace fwdegen::kernels
