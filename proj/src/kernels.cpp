#include "qtc/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace qtc::kernels {

namespace scalar {

void hadamard_scale(cplx* a, const double* w, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) a[i] *= w[i];
}

void hadamard_divide(cplx* a, const double* w, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) a[i] /= w[i];
}

double weighted_sqnorm(const cplx* a, const double* w, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * std::norm(a[i]);
    return s;
}

}  // namespace scalar

namespace {

Isa detect()
{
    const char* env = std::getenv("QTC_KERNELS");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return avx2::available() ? Isa::avx2 : Isa::scalar;
}

}  // namespace

Isa active_isa()
{
    static const Isa isa = detect();
    return isa;
}

const char* isa_name(Isa isa)
{
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

void hadamard_scale(cplx* a, const double* w, std::size_t n)
{
    if (active_isa() == Isa::avx2) return avx2::hadamard_scale(a, w, n);
    scalar::hadamard_scale(a, w, n);
}

void hadamard_divide(cplx* a, const double* w, std::size_t n)
{
    if (active_isa() == Isa::avx2) return avx2::hadamard_divide(a, w, n);
    scalar::hadamard_divide(a, w, n);
}

double weighted_sqnorm(const cplx* a, const double* w, std::size_t n)
{
    if (active_isa() == Isa::avx2) return avx2::weighted_sqnorm(a, w, n);
    return scalar::weighted_sqnorm(a, w, n);
}

}  // namespace qtc::kernels
