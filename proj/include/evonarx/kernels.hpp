#pragma once

#include <cstddef>

// Small dense kernels used by the simulation, error and training inner loops.
//
// Every backend accumulates in the same fixed four-lane order and combines
// lanes as (l0+l2)+(l1+l3), so scalar, AVX2 and NEON results are bit-identical
// and runtime dispatch never changes numerics. The kernel translation units
// are built with floating-point contraction disabled to keep that guarantee.

namespace evonarx::kern {

enum class Backend { Scalar, Avx2, Neon };

// Currently dispatched backend.
Backend active_backend();

// Force a backend; returns false (and leaves dispatch unchanged) if the CPU
// cannot run it. The EVONARX_KERNELS env var ("scalar", "avx2", "neon")
// overrides auto-detection at startup.
bool set_backend(Backend b);

const char* backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

}  // namespace evonarx::kern
