#include "qtc/random.hpp"

#include <cmath>

namespace qtc {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng stream_rng(std::uint64_t seed, std::uint64_t index)
{
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x51ed270b27a3f2c1ULL)));
}

double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normal(Rng& rng)
{
    // Box-Muller; avoids the implementation-defined std::normal_distribution.
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Matrix ginibre(Rng& rng, int rows, int cols)
{
    Matrix g(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) g(i, j) = cplx(normal(rng), normal(rng)) / std::sqrt(2.0);
    return g;
}

Matrix haar_unitary(Rng& rng, int d)
{
    Matrix g = ginibre(rng, d, d);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < d; ++k) {
        cplx ph = r(k, k) / std::abs(r(k, k));
        q.col(k) *= ph;
    }
    return q;
}

Matrix random_hermitian(Rng& rng, int d)
{
    Matrix g = ginibre(rng, d, d);
    return 0.5 * (g + g.adjoint());
}

DensityMatrix random_density(Rng& rng, int d)
{
    Matrix g = ginibre(rng, d, d);
    Matrix m = g * g.adjoint();
    m /= m.trace().real();
    return DensityMatrix(hermitian_part(m));
}

DensityMatrix random_full_rank_state(Rng& rng, int d, double mix)
{
    return project_full_rank(random_density(rng, d), mix);
}

DensityMatrix random_diagonal_state(Rng& rng, int d, double mix)
{
    RVector p(d);
    for (int k = 0; k < d; ++k) p(k) = -std::log(std::max(uniform01(rng), 1e-300));
    p /= p.sum();
    p = (1.0 - mix) * p + RVector::Constant(d, mix / d);
    return DensityMatrix(p.cast<cplx>().asDiagonal().toDenseMatrix());
}

}  // namespace qtc
