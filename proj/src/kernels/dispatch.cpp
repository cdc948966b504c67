#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "mdecomp/error.hpp"

namespace mdecomp::kernels {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(MDECOMP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(MDECOMP_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* resolve_default() {
  if (const char* env = std::getenv("MDECOMP_KERNEL")) {
    const std::string want(env);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (want == to_string(isa) && cpu_supports(isa)) return &table_for(isa);
    }
  }
  if (cpu_supports(Isa::Avx2)) return &table_for(Isa::Avx2);
  if (cpu_supports(Isa::Neon)) return &table_for(Isa::Neon);
  return &scalar_table();
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "scalar";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (cpu_supports(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& table_for(Isa isa) {
  if (!cpu_supports(isa)) {
    throw Error(ErrorKind::Argument,
                "kernel ISA '" + std::string(to_string(isa)) + "' is not available on this CPU");
  }
  switch (isa) {
#if defined(MDECOMP_HAVE_AVX2)
    case Isa::Avx2: return detail::avx2_table();
#endif
#if defined(MDECOMP_HAVE_NEON)
    case Isa::Neon: return detail::neon_table();
#endif
    default: return scalar_table();
  }
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    const KernelTable* resolved = resolve_default();
    const KernelTable* expected = nullptr;
    g_active.compare_exchange_strong(expected, resolved, std::memory_order_acq_rel);
    t = g_active.load(std::memory_order_acquire);
  }
  return *t;
}

Isa active_isa() { return active().isa; }

void select_isa(Isa isa) { g_active.store(&table_for(isa), std::memory_order_release); }

}  // namespace mdecomp::kernels
