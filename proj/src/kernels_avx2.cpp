// Compiled with -mavx2 -mfma when the compiler targets x86-64.
#include "qtc/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)
#include <immintrin.h>
#define QTC_HAVE_AVX2 1
#endif

namespace qtc::kernels::avx2 {

#ifdef QTC_HAVE_AVX2

bool available()
{
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

// Two complex numbers per register: [re0 im0 re1 im1]; weights broadcast as [w0 w0 w1 w1].
static inline __m256d load_weights(const double* w)
{
    __m128d pair = _mm_loadu_pd(w);
    return _mm256_permute4x64_pd(_mm256_castpd128_pd256(pair), 0x50);
}

void hadamard_scale(cplx* a, const double* w, std::size_t n)
{
    double* p = reinterpret_cast<double*>(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_loadu_pd(p + 2 * i);
        _mm256_storeu_pd(p + 2 * i, _mm256_mul_pd(v, load_weights(w + i)));
    }
    for (; i < n; ++i) a[i] *= w[i];
}

void hadamard_divide(cplx* a, const double* w, std::size_t n)
{
    double* p = reinterpret_cast<double*>(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_loadu_pd(p + 2 * i);
        _mm256_storeu_pd(p + 2 * i, _mm256_div_pd(v, load_weights(w + i)));
    }
    for (; i < n; ++i) a[i] /= w[i];
}

double weighted_sqnorm(const cplx* a, const double* w, std::size_t n)
{
    const double* p = reinterpret_cast<const double*>(a);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_loadu_pd(p + 2 * i);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(v, v), load_weights(w + i), acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += w[i] * std::norm(a[i]);
    return s;
}

#else

bool available() { return false; }
void hadamard_scale(cplx* a, const double* w, std::size_t n) { scalar::hadamard_scale(a, w, n); }
void hadamard_divide(cplx* a, const double* w, std::size_t n) { scalar::hadamard_divide(a, w, n); }
double weighted_sqnorm(const cplx* a, const double* w, std::size_t n) { return scalar::weighted_sqnorm(a, w, n); }

#endif

}  // namespace qtc::kernels::avx2
