#pragma once

// Inner-loop kernels shared by the Fourier operators and the reconstruction
// network. Every kernel has a portable scalar reference implementation; an
// AVX2/FMA variant is selected at runtime when the CPU supports it.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace kdg::simd {

enum class Backend { Scalar, Avx2 };

using cplx = std::complex<double>;

struct KernelTable {
    Backend backend;
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // sum x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum a[i] * b[i] (no conjugation)
    cplx (*cdot)(const cplx* a, const cplx* b, std::size_t n);
    // y[i] += a * x[i]
    void (*caxpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

// The table used by the library. Chosen once at startup (best available,
// overridable with KDG_SIMD=scalar|avx2) and switchable with set_backend.
const KernelTable& kernels();

// Returns false (and leaves the active table unchanged) if `b` is unavailable.
// Not meant to be called while other threads are running kernels.
bool set_backend(Backend b);

Backend active_backend();
std::string_view backend_name(Backend b);

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    kernels().axpy(a, x.data(), y.data(), x.size());
}

inline double dot(std::span<const double> x, std::span<const double> y) {
    return kernels().dot(x.data(), y.data(), x.size());
}

inline cplx cdot(std::span<const cplx> a, std::span<const cplx> b) {
    return kernels().cdot(a.data(), b.data(), a.size());
}

inline void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y) {
    kernels().caxpy(a, x.data(), y.data(), x.size());
}

}  // namespace kdg::simd
