#include <cstdlib>
#include <string_view>

#include "gapf/kernels/kernels.hpp"

namespace gapf::kernels {

namespace {

const KernelTable& select() {
  const char* forced = std::getenv("GAPF_SIMD");
  if (forced != nullptr && std::string_view(forced) == "scalar") return scalar();
  if (const KernelTable* t = avx2()) return *t;
  if (const KernelTable* t = neon()) return *t;
  return scalar();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> out{&scalar()};
  if (const KernelTable* t = avx2()) out.push_back(t);
  if (const KernelTable* t = neon()) out.push_back(t);
  return out;
}

}  // namespace gapf::kernels
