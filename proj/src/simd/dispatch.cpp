#include <atomic>
#include <cstdlib>
#include <cstring>

#include "qmoco/simd.hpp"

namespace qmoco::simd {
namespace {

Level detect() {
  if (const char* env = std::getenv("QMOCO_SIMD"); env && std::strcmp(env, "scalar") == 0)
    return Level::scalar;
  return avx2_supported() ? Level::avx2 : Level::scalar;
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{detect()};
  return level;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Level active_level() { return current().load(std::memory_order_relaxed); }

void set_level(Level level) {
  if (level == Level::avx2 && !avx2_supported()) level = Level::scalar;
  current().store(level, std::memory_order_relaxed);
}

const Kernels& kernels() {
  return active_level() == Level::avx2 ? avx2_kernels() : scalar_kernels();
}

const char* level_name(Level level) { return level == Level::avx2 ? "avx2" : "scalar"; }

}  // namespace qmoco::simd
