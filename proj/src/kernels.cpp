#include "tracerlab/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace trl::kernels {

#ifndef TRACERLAB_HAVE_AVX2
const Backend* avx2_backend() { return nullptr; }
#endif

namespace {

const Backend* g_override = nullptr;

const Backend* auto_backend() {
    static const Backend* chosen = [] {
        if (const char* env = std::getenv("TRACERLAB_KERNEL")) {
            if (std::strcmp(env, "scalar") == 0) return &scalar_backend();
            if (std::strcmp(env, "avx2") == 0 && avx2_backend()) return avx2_backend();
        }
        if (const Backend* b = avx2_backend()) return b;
        return &scalar_backend();
    }();
    return chosen;
}

} // namespace

const Backend& backend() { return g_override ? *g_override : *auto_backend(); }

void set_backend(const Backend* b) { g_override = b; }

} // namespace trl::kernels
