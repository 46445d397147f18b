// qtc: command-line front end.
// Exit codes: 0 success, 1 input error, 2 inequality violated beyond slack.

#include "qtc/entropy.hpp"
#include "qtc/estimation.hpp"
#include "qtc/inequalities.hpp"
#include "qtc/io.hpp"
#include "qtc/kernels.hpp"
#include "qtc/parallel.hpp"
#include "qtc/wasserstein.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace qtc;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0, kInputError = 1, kViolation = 2;
constexpr double kSlack = 1e-6;

std::vector<double> parse_grid(const std::string& spec)
{
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidInput("grid '" + spec + "': '" + item + "' is not a number");
        }
    }
    if (parts.size() != 3) throw InvalidInput("grid '" + spec + "': expected start:stop:step");
    double a = parts[0], b = parts[1], h = parts[2];
    if (!(h > 0) || b < a) throw InvalidInput("grid '" + spec + "': need step > 0 and stop ≥ start");
    long n = static_cast<long>(std::floor((b - a) / h + 1e-12)) + 1;
    if (n > 1000000) throw ResourceLimit("grid has more than 1e6 points");
    std::vector<double> out;
    for (long i = 0; i < n; ++i) out.push_back(a + i * h);
    return out;
}

std::string num(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw InvalidInput("cannot write " + path);
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

Matrix default_observable(int d)
{
    Matrix f = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) f(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
    return f;
}

int cmd_validate(const std::string& gen_path, double tol, const std::string& out)
{
    DBGenerator gen = load_generator(gen_path);
    ValidationReport rep = validate(gen, tol);
    Json checks = Json::array();
    for (const auto& c : rep.checks) checks.push_back(Json{{"name", c.name}, {"residual", c.residual}, {"passed", c.passed}});
    Json j{{"command", "validate"}, {"generator", gen_path}, {"dim", gen.dim()}, {"terms", gen.size()},
           {"tolerance", tol}, {"checks", checks}, {"ok", rep.ok()}};
    if (rep.ok()) {
        try {
            j["spectral_gap"] = spectral_gap(gen).spectral_gap;
            j["primitive"] = true;
        } catch (const NonPrimitive&) {
            j["primitive"] = false;
        }
    }
    Output o(out);
    o.os() << j.dump(2) << "\n";
    return rep.ok() && j.value("primitive", false) ? kOk : kInputError;
}

int cmd_evolve(const std::string& gen_path, const std::string& state_path, const std::string& grid, const std::string& out)
{
    DBGenerator gen = load_generator(gen_path);
    DensityMatrix rho = density_from_json(load_json(state_path), state_path);
    if (rho.dim() != gen.dim()) throw InvalidInput("state dimension differs from generator");
    std::vector<double> ts = parse_grid(grid);
    Propagator prop(gen);
    Output o(out);
    o.os() << "# qtc evolve generator=" << gen_path << " state=" << state_path << "\n";
    o.os() << "t,relative_entropy,fisher_information,trace_distance_to_sigma,de_bruijn_residual\n";
    for (double t : ts) {
        DensityMatrix rt(hermitian_part(prop.schrodinger(rho.matrix(), t)), 1e-9);
        double d = relative_entropy(rt, gen.sigma()).value;
        double i = fisher_information(gen, rt);
        double tr = trace_norm(rt.matrix() - gen.sigma().matrix());
        double res = t > 0 ? de_bruijn_residual(gen, prop, rho, t, 0.0) : 0.0;
        o.os() << num(t) << "," << num(d) << "," << num(i) << "," << num(tr) << "," << num(res) << "\n";
    }
    return kOk;
}

struct WassersteinArgs {
    std::string gen, rho, sigma, certificate, out;
    int order = 2;
    std::string variant = "lip";
    int segments = 4;
    int max_segments = 64;
    int starts = 16;
    std::uint64_t seed = 1;
};

int cmd_wasserstein(const WassersteinArgs& a)
{
    LipVariant v = parse_variant(a.variant);
    DBGenerator gen = load_generator(a.gen);
    DensityMatrix rho = density_from_json(load_json(a.rho), a.rho);
    DensityMatrix sig = a.sigma.empty() ? gen.sigma() : density_from_json(load_json(a.sigma), a.sigma);
    if (rho.dim() != gen.dim() || sig.dim() != gen.dim()) throw InvalidInput("state dimension differs from generator");
    Json j{{"command", "wasserstein"}, {"order", a.order}, {"seed", a.seed}, {"generator", a.gen}};
    Json cert;
    if (a.order == 1) {
        W1Options o;
        o.starts = a.starts;
        o.seed = a.seed;
        WassersteinResult r = w1(gen, rho, sig, v, o);
        j["variant"] = variant_name(v);
        j["value"] = r.value;
        j["bracket"] = {r.lower, r.upper};
        j["iterations"] = r.iterations;
        j["converged"] = r.converged;
        j["certificate_lipschitz"] = lipschitz_constant(gen, r.certificate, v);
        cert = Json{{"observable", to_json(r.certificate)}};
    } else if (a.order == 2) {
        BracketOptions o;
        o.w2.segments = a.segments;
        o.w2.max_segments = std::max(a.segments, a.max_segments);
        o.w1.starts = a.starts;
        o.w1.seed = a.seed;
        WassersteinResult r = w2_bracket(gen, rho, sig, o);
        j["value"] = r.upper;
        j["bracket"] = {r.lower, r.upper};
        j["iterations"] = r.iterations;
        j["converged"] = r.converged;
        j["segments"] = r.segments;
        j["trapezoid_action"] = r.action;
        j["midpoint_action"] = r.midpoint_action;
        j["speed_variance"] = r.speed_variance;
        j["continuity_residual"] = r.max_residual;
        Json ref = Json::array();
        for (auto& [k, v] : r.refinement) ref.push_back({k, v});
        j["refinement"] = ref;
        Json states = Json::array(), pots = Json::array();
        for (auto& s : r.states) states.push_back(to_json(s));
        for (auto& p : r.potentials) pots.push_back(to_json(p));
        cert = Json{{"states", states}, {"potentials", pots}};
    } else {
        throw InvalidInput("--order must be 1 or 2");
    }
    if (!a.certificate.empty()) {
        save_json(a.certificate, cert);
        j["certificate_file"] = a.certificate;
    }
    Output out(a.out);
    out.os() << j.dump(2) << "\n";
    return kOk;
}

int cmd_chain(const std::string& gen_path, int samples, std::uint64_t seed, const std::string& report, int threads)
{
    if (samples <= 0) throw InvalidInput("--samples must be positive");
    DBGenerator gen = load_generator(gen_path);
    ValidationReport v = validate(gen);
    if (!v.ok()) throw InvalidInput("generator fails the detailed-balance checks");
    ThreadPool pool(threads);
    ChainOptions opt;
    opt.samples = samples;
    opt.seed = seed;
    ChainResult res = chain_check(gen, opt, pool);

    fs::path rp(report);
    fs::path dir = rp.has_parent_path() ? rp.parent_path() : fs::path(".");
    std::ofstream csv(report);
    if (!csv) throw InvalidInput("cannot write " + report);
    csv << "# qtc chain-check seed=" << seed << " samples=" << samples << " dim=" << gen.dim()
        << " alpha1=" << num(res.alpha1) << (res.alpha_exact ? " (closed form)" : " (sampled)")
        << " gap=" << num(res.gap) << " kappa=[" << num(res.kappa.lower) << "," << num(res.kappa.upper) << "]\n";
    csv << "inequality,constant,worst_margin,witness_file\n";
    bool violated = false;
    for (const InequalityReport& r : res.reports) {
        std::string wf;
        if (r.witness) {
            wf = std::string("witness_") + inequality_name(r.kind) + ".json";
            Json w{{"inequality", inequality_name(r.kind)}, {"margin", r.worst_margin}, {"matrix", to_json(*r.witness)}};
            if (r.witness_r) w["r"] = *r.witness_r;
            save_json((dir / wf).string(), w);
        }
        csv << inequality_name(r.kind) << "," << r.constant << "=" << num(r.constant_value) << ","
            << num(r.worst_margin) << "," << wf << "\n";
        if (r.worst_margin < -kSlack) violated = true;
    }
    return violated ? kViolation : kOk;
}

int cmd_concentration(const std::string& gen_path, const std::string& obs_path, const std::string& type,
                      const std::string& grid, double c1, int n, const std::string& out)
{
    DBGenerator gen = load_generator(gen_path);
    Matrix f = obs_path.empty() ? default_observable(gen.dim())
                                : hermitian_from_json(load_json(obs_path), obs_path).matrix();
    if (f.rows() != gen.dim()) throw InvalidInput("observable dimension differs from generator");
    std::vector<double> rs = parse_grid(grid);
    std::function<double(double)> bound;
    std::function<double(double)> tail = [&](double r) { return tail_probability(gen.sigma(), f, r); };
    std::string label;
    if (type == "exp") {
        ExpConcentration e = exp_concentration(gen, f);
        bound = [e](double r) { return e.bound(r); };
        label = "exp_bound_lambda=gap";
    } else if (type == "gauss") {
        if (!(c1 > 0)) {
            if (!is_depolarizing(gen)) throw InvalidInput("--c1 is required unless the generator is depolarizing");
            c1 = gen.lipschitz_dim() / mlsi_constant_depolarizing(gen.sigma());
        }
        GaussConcentration g = gauss_concentration(gen, f, c1);
        bound = [g](double r) { return g.bound(r); };
        label = "gauss_bound_c1=" + num(c1);
    } else if (type == "depolarizing") {
        DepolarizingGauss g = depolarizing_gauss(gen.sigma(), f);
        bound = [g](double r) { return g.bound(r); };
        label = "depolarizing_gauss_bound_alpha1";
    } else if (type == "product") {
        if (n < 1) throw InvalidInput("--n must be positive");
        ProductConcentration p = product_concentration(gen, f);
        DBGenerator big = tensorize(gen, n);
        Matrix fn = site_average(f, n);
        bound = [p, n](double r) { return p.bound(n, r); };
        tail = [big, fn](double r) { return tail_probability(big.sigma(), fn, r); };
        label = "product_bound_n=" + std::to_string(n);
    } else {
        throw InvalidInput("--type must be exp, gauss, depolarizing or product");
    }
    Output o(out);
    o.os() << "# qtc concentration type=" << type << " generator=" << gen_path << "\n";
    o.os() << "r,tail," << label << ",margin\n";
    bool violated = false;
    for (double r : rs) {
        double t = tail(r), b = bound(r);
        if (b < t - 1e-9) violated = true;
        o.os() << num(r) << "," << num(t) << "," << num(b) << "," << num(b - t) << "\n";
    }
    return violated ? kViolation : kOk;
}

struct EstimateArgs {
    std::string family = "diag", gen, out;
    double theta = 0.3, eps = 0.5;
    int n = 8;
    long trials = 100000;
    std::uint64_t seed = 1;
    int threads = 0;
};

int cmd_estimate(const EstimateArgs& a)
{
    ParametricFamily fam = family_by_name(a.family);
    DensityMatrix rho = fam.at(a.theta);
    HermitianOperator f = estimator_observable(fam, a.theta);
    std::string gen_label = "depolarizing(rho_theta)";
    DBGenerator gen;
    if (a.gen.empty()) {
        gen = depolarizing_generator(rho);
    } else {
        gen = load_generator(a.gen);
        gen_label = a.gen;
        if (gen.dim() != rho.dim()) throw InvalidInput("generator dimension differs from the family");
        if ((gen.sigma().matrix() - rho.matrix()).norm() > 1e-8)
            throw InvalidInput("generator's invariant state is not rho_theta");
    }
    ThreadPool pool(a.threads);
    ErrorEstimate mc = monte_carlo_error_probability(fam, a.theta, a.n, a.eps, a.trials, a.seed, pool);
    double bd = error_bound_depolarizing(rho, f.matrix(), a.n, a.eps);
    double bg = error_bound_dissipative(gen, f.matrix(), a.n, a.eps);
    Json j{{"command", "estimate"},
           {"family", a.family},
           {"theta", a.theta},
           {"n", a.n},
           {"eps", a.eps},
           {"trials", a.trials},
           {"seed", a.seed},
           {"sld_fisher", sld_fisher(fam, a.theta)},
           {"bound_depolarizing", bd},
           {"bound_dissipative", bg},
           {"empirical", mc.probability},
           {"std_error", mc.std_error},
           {"generator", gen_label}};
    if (a.n <= 60 && fam.dim <= 4) j["exact"] = exact_error_probability(fam, a.theta, a.n, a.eps);
    Output o(a.out);
    o.os() << j.dump(2) << "\n";
    bool violated = mc.probability > std::min(bd, bg) + 3 * mc.std_error;
    return violated ? kViolation : kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quantum transportation-cost inequalities: generators, Wasserstein distances, concentration"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0: QTC_THREADS or hardware)");

    std::string gen, out;
    double tol = 1e-8;
    auto* v = app.add_subcommand("validate", "check the detailed-balance structure of a generator");
    v->add_option("--generator", gen, "generator JSON")->required();
    v->add_option("--tol", tol, "residual tolerance");
    v->add_option("-o,--output", out, "report path (default stdout)");

    std::string state, grid = "0:2:0.25";
    auto* ev = app.add_subcommand("evolve", "relative entropy and Fisher information along the semigroup");
    ev->add_option("--generator", gen)->required();
    ev->add_option("--state", state, "initial state JSON")->required();
    ev->add_option("--t-grid", grid, "start:stop:step");
    ev->add_option("-o,--output", out);

    WassersteinArgs wa;
    auto* w = app.add_subcommand("wasserstein", "W1 by duality or a certified W2 bracket");
    w->add_option("--generator", wa.gen)->required();
    w->add_option("--rho", wa.rho, "first state JSON")->required();
    w->add_option("--sigma", wa.sigma, "second state JSON (default: invariant state)");
    w->add_option("--order", wa.order)->check(CLI::IsMember({1, 2}));
    w->add_option("--variant", wa.variant, "lip, lip2, lipg, liph or clh");
    w->add_option("--segments", wa.segments, "initial path segments K");
    w->add_option("--max-segments", wa.max_segments);
    w->add_option("--starts", wa.starts, "multi-starts for W1");
    w->add_option("--seed", wa.seed);
    w->add_option("--certificate", wa.certificate, "write certificate JSON here");
    w->add_option("-o,--output", wa.out);

    int samples = 100;
    std::uint64_t seed = 1;
    std::string report;
    auto* ch = app.add_subcommand("chain-check", "sample the MLSI, TC2, TC1, PI, Pinsker and concentration margins");
    ch->add_option("--generator", gen)->required();
    ch->add_option("--samples", samples);
    ch->add_option("--seed", seed);
    ch->add_option("--report", report, "CSV report path")->required();

    std::string obs, type = "exp", rgrid = "0:3:0.1";
    double c1 = 0.0;
    int n = 2;
    auto* co = app.add_subcommand("concentration", "tail probability against a concentration bound");
    co->add_option("--generator", gen)->required();
    co->add_option("--observable", obs, "observable JSON (default diag(1,-1,...))");
    co->add_option("--type", type, "exp, gauss, depolarizing or product");
    co->add_option("--r-grid", rgrid, "start:stop:step");
    co->add_option("--c1", c1, "TC1 constant for the Gaussian bound");
    co->add_option("--n", n, "sites for the product bound");
    co->add_option("-o,--output", out);

    EstimateArgs ea;
    auto* es = app.add_subcommand("estimate", "finite-n error bounds against Monte Carlo");
    es->add_option("--family", ea.family, "diag, rotation or gibbs");
    es->add_option("--theta", ea.theta);
    es->add_option("--n", ea.n);
    es->add_option("--eps", ea.eps);
    es->add_option("--trials", ea.trials);
    es->add_option("--seed", ea.seed);
    es->add_option("--generator", ea.gen, "preparation generator with invariant state rho_theta");
    es->add_option("-o,--output", ea.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kInputError;
    }

    try {
        if (*v) return cmd_validate(gen, tol, out);
        if (*ev) return cmd_evolve(gen, state, grid, out);
        if (*w) return cmd_wasserstein(wa);
        if (*ch) return cmd_chain(gen, samples, seed, report, threads);
        if (*co) return cmd_concentration(gen, obs, type, rgrid, c1, n, out);
        if (*es) {
            ea.threads = threads;
            return cmd_estimate(ea);
        }
    } catch (const std::exception& e) {
        std::cerr << "qtc: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
