#include <cstdlib>
#include <string>

#include "fracsys/simd.hpp"

namespace fracsys::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* env = std::getenv("FRACSYS_SIMD"); env != nullptr && std::string(env) == "scalar")
    return scalar_table();
  if (const KernelTable* t = table_for(Isa::avx2)) return *t;
  if (const KernelTable* t = table_for(Isa::neon)) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &scalar_table();
    case Isa::avx2:
      return cpu_has_avx2() ? detail::avx2_table() : nullptr;
    case Isa::neon:
      return detail::neon_table();
  }
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace fracsys::simd
