#include <atomic>
#include <cstdlib>
#include <string_view>

#include "spkde/simd/ops.hpp"
#include "tables.hpp"

namespace spkde::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(SPKDE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* pick_default() noexcept {
    if (const char* env = std::getenv("SPKDE_SIMD"); env != nullptr) {
        if (std::string_view(env) == "scalar") return &detail::scalar_table();
    }
    if (const Ops* v = avx2_ops()) return v;
    return &detail::scalar_table();
}

std::atomic<const Ops*>& slot() noexcept {
    static std::atomic<const Ops*> current{pick_default()};
    return current;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

const Ops& scalar_ops() noexcept { return detail::scalar_table(); }

const Ops* avx2_ops() noexcept {
#if defined(SPKDE_HAVE_AVX2)
    if (cpu_has_avx2()) return &detail::avx2_table();
#endif
    return nullptr;
}

const Ops& active() noexcept { return *slot().load(std::memory_order_acquire); }

bool set_active(Isa isa) noexcept {
    const Ops* table = isa == Isa::Scalar ? &detail::scalar_table() : avx2_ops();
    if (table == nullptr) return false;
    slot().store(table, std::memory_order_release);
    return true;
}

}  // namespace spkde::simd
