#include "archboost/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace archboost::kernels {

const Ops* avx2_ops_impl();  // defined in kernels_avx2.cpp

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* resolve() {
  const Ops* avx2 = avx2_ops();
  const char* env = std::getenv("ARCHBOOST_SIMD");
  if (env) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2) return avx2;
  }
  return avx2 ? avx2 : &scalar_ops();
}

std::atomic<const Ops*>& active_slot() {
  static std::atomic<const Ops*> slot{resolve()};
  return slot;
}

}  // namespace

const Ops* avx2_ops() {
  static const Ops* ops = cpu_has_avx2_fma() ? avx2_ops_impl() : nullptr;
  return ops;
}

const Ops& active_ops() { return *active_slot().load(std::memory_order_relaxed); }

Backend active_backend() {
  return &active_ops() == &scalar_ops() ? Backend::scalar : Backend::avx2;
}

void force_backend(Backend b) {
  if (b == Backend::scalar) {
    active_slot().store(&scalar_ops(), std::memory_order_relaxed);
  } else if (const Ops* v = avx2_ops()) {
    active_slot().store(v, std::memory_order_relaxed);
  }
}

}  // namespace archboost::kernels
