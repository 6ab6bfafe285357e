#include "ehrelay/kernels/secrecy_kernel.hpp"

namespace ehrelay::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2:
#if defined(EHRELAY_HAVE_AVX2_KERNEL) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() {
  static const Isa best = isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
  return best;
}

void secrecy_gain(Isa isa, const SecrecyConstants& k, const AllocationBatch& batch,
                  std::span<double> out) {
  if (!isa_available(isa)) {
    throw ContractError("kernel variant '" + std::string(isa_name(isa)) + "' is not available");
  }
  switch (isa) {
    case Isa::kScalar: secrecy_gain_scalar(k, batch, out); return;
    case Isa::kAvx2:
#if defined(EHRELAY_HAVE_AVX2_KERNEL)
      secrecy_gain_avx2(k, batch, out);
#endif
      return;
  }
}

void secrecy_gain(const SecrecyConstants& k, const AllocationBatch& batch, std::span<double> out) {
  secrecy_gain(detect_isa(), k, batch, out);
}

}  // namespace ehrelay::kernels
