#pragma once

#include "spkde/simd/ops.hpp"

namespace spkde::simd::detail {

const Ops& scalar_table() noexcept;

#if defined(SPKDE_HAVE_AVX2)
const Ops& avx2_table() noexcept;
#endif

}  // namespace spkde::simd::detail
