#include "qtc/inequalities.hpp"

#include "qtc/entropy.hpp"
#include "qtc/optim.hpp"
#include "qtc/random.hpp"

#include <algorithm>
#include <cmath>

namespace qtc {

const char* inequality_name(Inequality k)
{
    switch (k) {
    case Inequality::MLSI: return "MLSI";
    case Inequality::TC2: return "TC2";
    case Inequality::TC1: return "TC1";
    case Inequality::PI: return "PI";
    case Inequality::Pinsker: return "Pinsker";
    case Inequality::ExpConc: return "ExpConc";
    case Inequality::GaussConc: return "GaussConc";
    }
    return "?";
}

double mlsi_margin(const DBGenerator& gen, const DensityMatrix& rho, double alpha)
{
    require_full_rank(rho);
    double d = relative_entropy(rho, gen.sigma()).value;
    return fisher_information(gen, rho) - 2.0 * alpha * d;
}

MlsiEstimate mlsi_estimate(const DBGenerator& gen, const std::vector<DensityMatrix>& samples)
{
    MlsiEstimate out;
    for (const DensityMatrix& rho : samples) {
        require_full_rank(rho);
        double d = relative_entropy(rho, gen.sigma()).value;
        if (!(d > 1e-12)) continue;  // 0/0 at ρ = σ
        double ratio = fisher_information(gen, rho) / (2.0 * d);
        ++out.used;
        if (ratio < out.value) {
            out.value = ratio;
            out.witness = rho.matrix();
        }
    }
    return out;
}

TransportMargin tc2_check(const DBGenerator& gen, const DensityMatrix& rho, double c2, W2Options opt)
{
    if (!(c2 > 0)) throw InvalidInput("c2 must be positive");
    TransportMargin m;
    m.divergence = relative_entropy(rho, gen.sigma()).value;
    m.bound = std::sqrt(2.0 * c2 * std::max(0.0, m.divergence));
    opt.target = m.bound;
    WassersteinResult w = w2_upper(gen, rho, gen.sigma(), opt);
    m.distance = w.upper;
    m.segments = w.segments;
    m.margin = m.bound - m.distance;
    return m;
}

TransportMargin tc1_check(const DBGenerator& gen, const DensityMatrix& rho, double c1, const W1Options& opt)
{
    if (!(c1 > 0)) throw InvalidInput("c1 must be positive");
    TransportMargin m;
    m.divergence = relative_entropy(rho, gen.sigma()).value;
    m.bound = std::sqrt(2.0 * c1 * std::max(0.0, m.divergence));
    m.distance = w1(gen, rho, gen.sigma(), LipVariant::Lip, opt).value;
    m.margin = m.bound - m.distance;
    return m;
}

RMatrix kappa_multiplier(const DensityMatrix& sigma, double omega)
{
    const RVector& p = sigma.eigenvalues();
    RMatrix fw = tilted_weights(p, omega);
    RMatrix bw = tilted_weights(p, -omega);
    return fw.cwiseQuotient(bw);
}

namespace {

double top_singular(const Matrix& b, Eigen::VectorXcd* u, Eigen::VectorXcd* v)
{
    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (u) *u = svd.matrixU().col(0);
    if (v) *v = svd.matrixV().col(0);
    return svd.singularValues()(0);
}

Matrix unitary_factor(const Matrix& g)
{
    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

// max_k ‖x_k‖² · max_l ‖y_l‖² for the factorization m = X Yᵀ, Yᵀ = X⁻¹m
double factorization_value(const RMatrix& x, const RMatrix& m)
{
    Eigen::FullPivLU<RMatrix> lu(x);
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    RMatrix yt = lu.solve(m);
    if ((x * yt - m).norm() > 1e-10 * std::max(1.0, m.norm())) return std::numeric_limits<double>::infinity();
    return x.rowwise().squaredNorm().maxCoeff() * yt.colwise().squaredNorm().maxCoeff();
}

double softmax_log(const RVector& v, double beta, RVector& weights)
{
    double mx = v.maxCoeff();
    weights = (beta * (v.array() - mx)).exp();
    double s = weights.sum();
    weights /= s;
    return mx + std::log(s) / beta;
}

}  // namespace

Bracket schur_multiplier_norm(const RMatrix& m, std::uint64_t seed, int starts)
{
    const int d = static_cast<int>(m.rows());
    if (m.cols() != d) throw InvalidInput("multiplier must be square");
    Matrix mc = m.cast<cplx>();
    Bracket b;
    b.lower = m.cwiseAbs().maxCoeff();

    // Lower: alternate A ← unitary factor of m∘(u v^*); the value never decreases.
    for (int s = 0; s < std::max(1, starts); ++s) {
        Matrix a;
        if (s == 0)
            a = Matrix::Identity(d, d);
        else if (s == 1)
            a = unitary_factor(mc);
        else {
            Rng rng = stream_rng(seed, static_cast<std::uint64_t>(s));
            a = haar_unitary(rng, d);
        }
        double val = 0.0;
        for (int it = 0; it < 500; ++it) {
            Eigen::VectorXcd u, v;
            double nv = top_singular(mc.cwiseProduct(a), &u, &v);
            b.lower = std::max(b.lower, nv);
            if (it > 0 && nv <= val * (1 + 1e-14)) break;
            val = nv;
            a = unitary_factor(mc.cwiseProduct(u * v.adjoint()));
        }
    }

    // Upper: ‖S_m‖ ≤ max_k ‖x_k‖ max_l ‖y_l‖ for any m = X Yᵀ. Start from the SVD and
    // reduce a soft-max surrogate over invertible X.
    Eigen::JacobiSVD<RMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RVector sv = svd.singularValues();
    double floor = std::max(1e-300, 1e-8 * sv(0));
    RMatrix x = svd.matrixU() * sv.cwiseMax(floor).cwiseSqrt().asDiagonal();
    double best = factorization_value(x, m);
    const int n = d * d;
    RVector z = Eigen::Map<RVector>(x.data(), n);
    for (double beta : {4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0}) {
        optim::Objective fn = [&](const RVector& zz, RVector* g) {
            RMatrix xx = Eigen::Map<const RMatrix>(zz.data(), d, d);
            Eigen::FullPivLU<RMatrix> lu(xx);
            if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
            RMatrix yt = lu.solve(m);
            RVector r = xx.rowwise().squaredNorm();
            RVector c = yt.colwise().squaredNorm().transpose();
            if (r.minCoeff() <= 0 || c.minCoeff() <= 0) return std::numeric_limits<double>::infinity();
            RVector pr, pc;
            double f = softmax_log(r.array().log().matrix(), beta, pr) + softmax_log(c.array().log().matrix(), beta, pc);
            if (g) {
                RMatrix gx = 2.0 * (pr.cwiseQuotient(r)).asDiagonal() * xx;
                RMatrix xinv_t = lu.inverse().transpose();
                gx -= 2.0 * xinv_t * yt * (pc.cwiseQuotient(c)).asDiagonal() * yt.transpose();
                *g = Eigen::Map<RVector>(gx.data(), n);
            }
            return f;
        };
        optim::Options o;
        o.max_iter = 400;
        auto r = optim::lbfgs(fn, z, o);
        z = r.x;
        RMatrix xx = Eigen::Map<const RMatrix>(z.data(), d, d);
        best = std::min(best, factorization_value(xx, m));
    }
    b.upper = std::sqrt(best);
    if (b.lower > b.upper * (1 + 1e-9))
        throw InternalConsistency("Schur multiplier bracket inverted");
    return b;
}

Bracket kappa(const DBGenerator& gen, std::uint64_t seed)
{
    Bracket out{1.0, 1.0};
    std::vector<double> seen;
    for (const Term& t : gen.terms()) {
        if (std::any_of(seen.begin(), seen.end(), [&](double w) { return std::abs(w - t.omega) < 1e-12; })) continue;
        seen.push_back(t.omega);
        if (t.omega == 0.0) continue;  // multiplier ≡ 1
        Bracket b = schur_multiplier_norm(kappa_multiplier(gen.sigma(), t.omega), seed);
        out.lower = std::max(out.lower, b.lower);
        out.upper = std::max(out.upper, b.upper);
    }
    return out;
}

double poincare_margin(const DBGenerator& gen, const Matrix& f, double lambda)
{
    if (!is_hermitian(f, 1e-10)) throw InvalidInput("observable is not self-adjoint");
    const DensityMatrix& s = gen.sigma();
    cplx mean = (s.matrix() * f).trace();
    if (std::abs(mean) > 1e-9 * std::max(1.0, f.norm())) throw InvalidInput("observable is not centered: Tr(σf) ≠ 0");
    double e = dirichlet_form_direct(gen, f, f, 0.5).real();
    double n = weighted_inner(s, f, f, 0.5).real();
    return e - lambda * n;
}

double tail_probability(const DensityMatrix& sigma, const Matrix& f, double r)
{
    if (!is_hermitian(f, 1e-10)) throw InvalidInput("observable is not self-adjoint");
    const int d = sigma.dim();
    double mean = (sigma.matrix() * f).trace().real();
    HermitianOperator fc(hermitian_part(f) - mean * Matrix::Identity(d, d));
    Interval e;
    e.lo = r;
    e.lo_closed = true;
    HermitianOperator p = spectral_indicator(fc, e);
    double t = (sigma.matrix() * p.matrix()).trace().real();
    return std::clamp(t, 0.0, 1.0);
}

double ExpConcentration::bound(double r) const
{
    return 3.0 * std::exp(-std::max(0.0, r) * std::sqrt(lambda) / (lip * c));
}

ExpConcentration exp_concentration(const DBGenerator& gen, const Matrix& f, double lambda)
{
    if (!(lambda > 0)) throw InvalidInput("spectral gap must be positive");
    ExpConcentration e;
    e.lambda = lambda;
    e.lip = lipschitz_constant(gen, f, LipVariant::Lip);
    if (e.lip <= 1e-14 * std::max(1.0, f.norm()))
        throw DegenerateObservable("observable is a multiple of the identity: Lipschitz constant vanishes");
    const int d = gen.dim();
    double mean = (gen.sigma().matrix() * f).trace().real();
    e.sup = op_norm(hermitian_part(f) - mean * Matrix::Identity(d, d));
    double a = e.sup / e.lip;
    double x = std::sqrt(lambda) * a;
    e.c = x > 1e-12 ? std::expm1(2.0 * x) / (std::sqrt(2.0) * x) : std::sqrt(2.0);
    return e;
}

ExpConcentration exp_concentration(const DBGenerator& gen, const Matrix& f)
{
    return exp_concentration(gen, f, spectral_gap(gen).spectral_gap);
}

double exp_concentration_bound(const DBGenerator& gen, const Matrix& f, double r)
{
    return exp_concentration(gen, f).bound(r);
}

std::pair<Matrix, Matrix> modular_parts(const DensityMatrix& sigma, const Matrix& f)
{
    require_full_rank(sigma);
    Matrix sq = eig_function(sigma.eig(), [](double x) { return std::sqrt(x); });
    Matrix isq = eig_function(sigma.eig(), [](double x) { return 1.0 / std::sqrt(x); });
    Matrix g = isq * f * sq;
    Matrix gr = 0.5 * (g + g.adjoint());
    Matrix gi = (g - g.adjoint()) / cplx(0.0, 2.0);
    return {hermitian_part(gr), hermitian_part(gi)};
}

double GaussConcentration::bound(double r) const { return std::exp(-r * r / (8.0 * lip_sq * c1)); }

GaussConcentration gauss_concentration(const DBGenerator& gen, const Matrix& f, double c1)
{
    if (!(c1 > 0)) throw InvalidInput("c1 must be positive");
    if (!is_hermitian(f, 1e-10)) throw InvalidInput("observable is not self-adjoint");
    auto [gr, gi] = modular_parts(gen.sigma(), f);
    double lr = lipschitz_constant(gen, gr, LipVariant::Lip);
    double li = lipschitz_constant(gen, gi, LipVariant::Lip);
    GaussConcentration g;
    g.lip_sq = std::max(lr * lr, li * li);
    g.c1 = c1;
    if (g.lip_sq <= 1e-28 * std::max(1.0, f.squaredNorm()))
        throw DegenerateObservable("both modular parts have vanishing Lipschitz constant");
    return g;
}

double gauss_concentration_bound(const DBGenerator& gen, const Matrix& f, double r, double c1)
{
    return gauss_concentration(gen, f, c1).bound(r);
}

namespace {
double spectral_width(const Matrix& h)
{
    RVector w = eigh(h).w;
    return w(w.size() - 1) - w(0);
}
}  // namespace

double DepolarizingGauss::bound(double r) const
{
    if (width_sq <= 0) return r > 0 ? 0.0 : 1.0;
    return std::exp(-r * r * alpha1 / (16.0 * width_sq));
}

DepolarizingGauss depolarizing_gauss(const DensityMatrix& sigma, const Matrix& f)
{
    if (!is_hermitian(f, 1e-10)) throw InvalidInput("observable is not self-adjoint");
    auto [gr, gi] = modular_parts(sigma, f);
    DepolarizingGauss g;
    g.alpha1 = mlsi_constant_depolarizing(sigma);
    double wr = spectral_width(gr), wi = spectral_width(gi);
    g.width_sq = std::max(wr * wr, wi * wi);
    return g;
}

double depolarizing_gauss_bound(const DensityMatrix& sigma, const Matrix& f, double r)
{
    return depolarizing_gauss(sigma, f).bound(r);
}

double ProductConcentration::exponent(int n, double r) const
{
    if (n < 1) throw InvalidInput("number of sites must be positive");
    return lambda * n * r * r / (8.0 * d * log_term * lip_sq);
}

ProductConcentration product_concentration(const DBGenerator& site, const Matrix& f)
{
    if (!is_hermitian(f, 1e-10)) throw InvalidInput("observable is not self-adjoint");
    ProductConcentration p;
    p.lambda = spectral_gap(site).spectral_gap;
    p.d = site.dim();
    double inv = 1.0 / site.sigma().min_eigenvalue();
    p.log_term = 11.0 + std::log(std::pow(static_cast<double>(p.d), 4) * inv);
    auto [gr, gi] = modular_parts(site.sigma(), f);
    double lr = lipschitz_constant(site, gr, LipVariant::Lip);
    double li = lipschitz_constant(site, gi, LipVariant::Lip);
    p.lip_sq = std::max(lr * lr, li * li);
    if (p.lip_sq <= 1e-28 * std::max(1.0, f.squaredNorm()))
        throw DegenerateObservable("both modular parts have vanishing Lipschitz constant");
    return p;
}

double product_concentration_bound(const DBGenerator& site, const Matrix& f, int n, double r)
{
    return product_concentration(site, f).bound(n, r);
}

Matrix site_average(const Matrix& f, int n, int max_dim)
{
    if (n < 1) throw InvalidInput("number of sites must be positive");
    const long d = f.rows();
    long total = 1;
    for (int k = 0; k < n; ++k) {
        total *= d;
        if (total > max_dim) throw ResourceLimit("tensor dimension exceeds cap " + std::to_string(max_dim));
    }
    Matrix out = Matrix::Zero(total, total);
    for (int k = 0; k < n; ++k) {
        long left = 1, right = 1;
        for (int i = 0; i < k; ++i) left *= d;
        for (int i = k + 1; i < n; ++i) right *= d;
        out += kron(kron(Matrix::Identity(left, left), f), Matrix::Identity(right, right));
    }
    return out / static_cast<double>(n);
}

double pinsker_check(const DensityMatrix& rho, const DensityMatrix& sigma)
{
    double d = relative_entropy(rho, sigma).value;
    return std::sqrt(2.0 * std::max(0.0, d)) - trace_norm(rho.matrix() - sigma.matrix());
}

std::vector<double> mixing_check(const DBGenerator& gen, const DensityMatrix& rho, const std::vector<double>& ts,
                                 double alpha)
{
    double d = relative_entropy(rho, gen.sigma()).value;
    Propagator prop(gen);
    std::vector<double> out;
    for (double t : ts) {
        if (t < 0) throw InvalidInput("negative time");
        Matrix rt = prop.schrodinger(rho.matrix(), t);
        out.push_back(std::exp(-alpha * t) * std::sqrt(2.0 * std::max(0.0, d)) -
                      trace_norm(rt - gen.sigma().matrix()));
    }
    return out;
}

namespace {

struct SampleOutcome {
    double mlsi = 0, tc2 = 0, tc1 = 0, pinsker = 0, poincare = 0;
    double expc = 0, gauss = 0;
    double exp_r = 0, gauss_r = 0;
    double exp_c = 0;
};

void record(InequalityReport& rep, double margin, const Matrix& witness, std::optional<double> r = std::nullopt)
{
    ++rep.samples;
    // strict: ties keep the lowest index
    if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.witness = witness;
        rep.witness_r = r;
    }
}

}  // namespace

ChainResult chain_check(const DBGenerator& gen, const ChainOptions& opt, ThreadPool& pool)
{
    if (opt.samples <= 0) throw InvalidInput("chain check needs at least one sample");
    const int d = gen.dim();
    const double dl = gen.lipschitz_dim();
    std::vector<double> grid = opt.r_grid;
    if (grid.empty())
        for (int i = 0; i <= 30; ++i) grid.push_back(0.1 * i);

    const std::size_t n = static_cast<std::size_t>(opt.samples);
    std::vector<DensityMatrix> states(n);
    std::vector<Matrix> observables(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rs = stream_rng(opt.seed, 2 * i);
        states[i] = random_full_rank_state(rs, d);
        Rng ro = stream_rng(opt.seed, 2 * i + 1);
        observables[i] = random_hermitian(ro, d);
    }

    ChainResult res;
    GeneratorSpectrum spec = spectral_gap(gen);
    res.gap = spec.spectral_gap;
    bool depol = is_depolarizing(gen);
    if (depol) {
        res.alpha1 = mlsi_constant_depolarizing(gen.sigma());
        res.alpha_exact = true;
    } else {
        MlsiEstimate est = mlsi_estimate(gen, states);
        if (est.used == 0) throw InvalidInput("no sample differs from the invariant state");
        res.alpha1 = est.value;
    }
    const double c2 = 1.0 / res.alpha1;
    const double c1 = dl * c2;
    res.kappa = kappa(gen, opt.seed);
    const double lambda_pi = 1.0 / (c2 * res.kappa.upper);
    const double c1_gauss = dl / res.alpha1;

    std::vector<SampleOutcome> out(n);
    pool.parallel_for(n, [&](std::size_t i) {
        const DensityMatrix& rho = states[i];
        SampleOutcome& o = out[i];
        o.mlsi = mlsi_margin(gen, rho, res.alpha1);
        o.tc2 = tc2_check(gen, rho, c2, opt.w2).margin;
        o.tc1 = tc1_check(gen, rho, c1, opt.w1).margin;
        o.pinsker = pinsker_check(rho, gen.sigma());

        const Matrix& f = observables[i];
        double mean = (gen.sigma().matrix() * f).trace().real();
        Matrix fc = f - mean * Matrix::Identity(d, d);
        o.poincare = poincare_margin(gen, fc, lambda_pi);

        ExpConcentration ec = exp_concentration(gen, f, res.gap);
        GaussConcentration gc = gauss_concentration(gen, f, c1_gauss);
        std::optional<DepolarizingGauss> dg;
        if (depol) dg = depolarizing_gauss(gen.sigma(), f);
        o.exp_c = ec.c;
        o.expc = o.gauss = std::numeric_limits<double>::infinity();
        for (double r : grid) {
            double tail = tail_probability(gen.sigma(), f, r);
            double me = ec.bound(r) - tail;
            double mg = gc.bound(r) - tail;
            if (dg) mg = std::min(mg, dg->bound(r) - tail);
            if (me < o.expc) {
                o.expc = me;
                o.exp_r = r;
            }
            if (mg < o.gauss) {
                o.gauss = mg;
                o.gauss_r = r;
            }
        }
    });

    auto make = [&](Inequality k, const std::string& name, double value) {
        InequalityReport r;
        r.kind = k;
        r.constant = name;
        r.constant_value = value;
        return r;
    };
    InequalityReport mlsi = make(Inequality::MLSI, res.alpha_exact ? "alpha1" : "alpha1_sampled", res.alpha1);
    InequalityReport tc2 = make(Inequality::TC2, "c2=1/alpha1", c2);
    InequalityReport tc1 = make(Inequality::TC1, "c1=d*c2", c1);
    InequalityReport pi = make(Inequality::PI, "lambda=1/(c2*kappa_upper)", lambda_pi);
    InequalityReport pin = make(Inequality::Pinsker, "none", 0.0);
    InequalityReport ex = make(Inequality::ExpConc, "lambda=gap", res.gap);
    InequalityReport ga = make(Inequality::GaussConc, "c1=d/alpha1", c1_gauss);
    for (std::size_t i = 0; i < n; ++i) {
        const SampleOutcome& o = out[i];
        record(mlsi, o.mlsi, states[i].matrix());
        record(tc2, o.tc2, states[i].matrix());
        record(tc1, o.tc1, states[i].matrix());
        record(pin, o.pinsker, states[i].matrix());
        record(pi, o.poincare, observables[i]);
        // C_{f,λ} > 1 is part of the exp bound's contract
        record(ex, o.exp_c > 1.0 ? o.expc : -std::abs(o.expc) - 1.0, observables[i], o.exp_r);
        record(ga, o.gauss, observables[i], o.gauss_r);
    }
    // the implied Poincaré constant may not exceed the measured gap
    if (res.gap - lambda_pi < pi.worst_margin) {
        pi.worst_margin = res.gap - lambda_pi;
        pi.witness.reset();
        pi.witness_r.reset();
    }
    res.reports = {mlsi, tc2, tc1, pi, pin, ex, ga};
    return res;
}

}  // namespace qtc
