// Elementwise kernels on interleaved complex arrays.
// Scalar reference plus an AVX2 variant picked at runtime.
#pragma once

#include <complex>
#include <cstddef>

namespace qtc::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

// a[i] *= w[i]
void hadamard_scale(cplx* a, const double* w, std::size_t n);
// a[i] /= w[i]
void hadamard_divide(cplx* a, const double* w, std::size_t n);
// sum_i w[i] |a[i]|^2
double weighted_sqnorm(const cplx* a, const double* w, std::size_t n);

// Active ISA. QTC_KERNELS=scalar in the environment forces the reference path.
Isa active_isa();
const char* isa_name(Isa isa);

namespace scalar {
void hadamard_scale(cplx* a, const double* w, std::size_t n);
void hadamard_divide(cplx* a, const double* w, std::size_t n);
double weighted_sqnorm(const cplx* a, const double* w, std::size_t n);
}  // namespace scalar

// Only callable when the CPU reports AVX2; otherwise these forward to scalar.
namespace avx2 {
bool available();
void hadamard_scale(cplx* a, const double* w, std::size_t n);
void hadamard_divide(cplx* a, const double* w, std::size_t n);
double weighted_sqnorm(const cplx* a, const double* w, std::size_t n);
}  // namespace avx2

}  // namespace qtc::kernels
