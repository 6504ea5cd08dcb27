// Command line front end. Each subcommand drives one library module and
// prints a JSON report on stdout; --csv writes the tabular part to a file.
// Exit codes: 0 success, 2 domain error, 3 solver non-convergence.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freeprob/entropic_ot.hpp"
#include "freeprob/finite_free.hpp"
#include "freeprob/io.hpp"
#include "freeprob/permuton_ldp.hpp"
#include "freeprob/polynomial.hpp"
#include "freeprob/random_matrix.hpp"
#include "freeprob/subordination.hpp"
#include "freeprob/transforms.hpp"
#include "freeprob/verification.hpp"

namespace {

using namespace freeprob;

std::vector<double> preset_args(const std::string& spec, const std::string& name,
                                std::size_t arity) {
    std::string inner = spec.substr(name.size() + 1, spec.size() - name.size() - 2);
    std::vector<double> out;
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        require(end && *end == '\0' && end != tok.c_str(),
                "bad numeric argument in preset " + spec);
        out.push_back(v);
    }
    require(out.size() == arity,
            name + " takes " + std::to_string(arity) + " arguments");
    return out;
}

// Grammar: bern | delta<x> | two-point(a,b,w) | uniform-grid(n,lo,hi)
// | "-" for measure JSON on stdin | path to a measure JSON file.
DiscreteMeasure parse_measure(const std::string& spec) {
    if (spec == "bern") return DiscreteMeasure({-1.0, 1.0}, {0.5, 0.5});
    if (spec.rfind("delta", 0) == 0 && spec.size() > 5) {
        char* end = nullptr;
        double x = std::strtod(spec.c_str() + 5, &end);
        if (end && *end == '\0') return point_mass(x);
    }
    if (spec.rfind("two-point(", 0) == 0 && spec.back() == ')') {
        auto a = preset_args(spec, "two-point", 3);
        require(a[2] > 0.0 && a[2] < 1.0, "two-point weight must lie in (0,1)");
        return make_measure({a[0], a[1]}, {a[2], 1.0 - a[2]});
    }
    if (spec.rfind("uniform-grid(", 0) == 0 && spec.back() == ')') {
        auto a = preset_args(spec, "uniform-grid", 3);
        double nd = a[0];
        require(nd == std::floor(nd) && nd >= 1.0 && nd <= 100000.0,
                "uniform-grid size must be an integer in [1, 1e5]");
        int n = static_cast<int>(nd);
        require(a[1] <= a[2], "uniform-grid needs lo <= hi");
        std::vector<double> atoms(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            atoms[static_cast<std::size_t>(i)] =
                n == 1 ? 0.5 * (a[1] + a[2])
                       : a[1] + (a[2] - a[1]) * static_cast<double>(i) /
                             static_cast<double>(n - 1);
        return make_uniform_measure(std::move(atoms));
    }
    if (spec == "-") {
        std::string text{std::istreambuf_iterator<char>(std::cin),
                         std::istreambuf_iterator<char>()};
        return measure_from_json_text(text);
    }
    std::ifstream in(spec);
    require(in.good(), "unknown preset and unreadable file: " + spec);
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return measure_from_json_text(text);
}

ConvolutionKind parse_kind(const std::string& kind) {
    if (kind == "add") return ConvolutionKind::additive;
    if (kind == "mul") return ConvolutionKind::multiplicative;
    return ConvolutionKind::compression;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        char* end = nullptr;
        long v = std::strtol(tok.c_str(), &end, 10);
        require(end && *end == '\0' && end != tok.c_str(), what + " must be integers");
        out.push_back(static_cast<int>(v));
    }
    require(!out.empty(), what + " must be nonempty");
    return out;
}

void emit(const json& report, const std::string& csv_path, const std::string& csv) {
    std::fputs(dump_json(report).c_str(), stdout);
    if (csv_path.empty()) return;
    std::ofstream out(csv_path, std::ios::binary);
    require(out.good(), "cannot open CSV output path: " + csv_path);
    out << csv;
}

struct FreeconvArgs {
    std::string kind, mu, nu, zgrid, csv;
    double z = 0.0, tau = 0.0;
    bool has_nu = false, has_tau = false, has_z = false;
};

int run_freeconv(const FreeconvArgs& a) {
    auto kind = parse_kind(a.kind);
    auto mu = parse_measure(a.mu);
    bool comp = kind == ConvolutionKind::compression;
    require(comp ? !a.has_nu : a.has_nu,
            comp ? "compression takes --mu and --tau, not --nu"
                 : "convolution needs --nu");
    require(comp == a.has_tau, comp ? "compression needs --tau in (0,1)"
                                    : "--tau applies to --kind comp only");
    DiscreteMeasure nu = a.has_nu ? parse_measure(a.nu) : point_mass(0.0);

    auto solve = [&](double z) {
        if (comp) return solve_compression(mu, a.tau, z);
        return kind == ConvolutionKind::additive ? solve_additive(mu, nu, z)
                                                 : solve_multiplicative(mu, nu, z);
    };
    auto value = [&](const SubordinationSolution& s) {
        return comp ? free_log_potential(s, mu) : free_log_potential(s, mu, nu);
    };

    json report;
    report["schema"] = 1;
    report["kind"] = a.kind;
    if (comp) report["tau"] = a.tau;
    std::string csv;
    if (a.has_z) {
        auto sol = solve(a.z);
        report["z"] = sol.z;
        report["omega"] = sol.omega;
        if (!comp) {
            report["omega_mu"] = sol.omega_mu;
            report["omega_nu"] = sol.omega_nu;
        }
        report["cauchy"] = free_cauchy(sol);
        report["log_potential"] = value(sol);
        report["residual"] = sol.residual;
    } else {
        auto spec = preset_args("grid(" + a.zgrid + ")", "grid", 3);
        double count = spec[2];
        require(count == std::floor(count) && count >= 1.0 && count <= 100000.0,
                "z-grid count must be an integer in [1, 1e5]");
        int n = static_cast<int>(count);
        require(n == 1 || spec[0] < spec[1], "z-grid needs lo < hi");
        std::vector<double> zs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            zs[static_cast<std::size_t>(i)] =
                n == 1 ? spec[0]
                       : spec[0] + (spec[1] - spec[0]) * static_cast<double>(i) /
                             static_cast<double>(n - 1);
        auto rows = comp ? compression_grid(mu, a.tau, zs)
                         : free_convolve_grid(mu, nu, kind, zs);
        json grid = json::array();
        std::vector<std::vector<double>> table;
        for (const auto& r : rows) {
            json row;
            row["z"] = r.z;
            row["cauchy"] = r.cauchy;
            row["log_potential"] = r.log_potential;
            grid.push_back(row);
            table.push_back({r.z, r.cauchy, r.log_potential});
        }
        report["grid"] = grid;
        csv = to_csv({"z", "cauchy", "log_potential"}, table);
    }
    emit(report, a.csv, csv);
    return 0;
}

struct OtsolveArgs {
    std::string kind, mu, nu, csv;
    std::vector<std::string> marginals;
    double z = 0.0, tau = 0.0, tol = 1e-12;
    bool has_nu = false, has_tau = false;
};

int run_otsolve(const OtsolveArgs& a) {
    auto kind = parse_kind(a.kind);
    json report;
    report["schema"] = 1;
    report["kind"] = a.kind;
    report["z"] = a.z;

    if (!a.marginals.empty()) {
        require(kind != ConvolutionKind::compression,
                "--marginal lists drive the convolution kinds only");
        require(a.marginals.size() >= 2, "multimarginal mode needs at least two --marginal");
        std::vector<DiscreteMeasure> margins;
        for (const auto& spec : a.marginals) margins.push_back(parse_measure(spec));
        auto sol = multimarginal_sinkhorn(build_multi_kernel(kind, a.z, margins), margins,
                                          a.tol);
        report["d"] = margins.size();
        report["value"] = sol.value;
        report["iterations"] = sol.iterations;
        report["marginal_residual"] = sol.marginal_residual;
        emit(report, a.csv, "");
        return 0;
    }

    auto mu = parse_measure(a.mu);
    bool comp = kind == ConvolutionKind::compression;
    require(comp ? !a.has_nu : a.has_nu,
            comp ? "compression takes --mu and --tau, not --nu"
                 : "convolution needs --nu");
    require(comp == a.has_tau, comp ? "compression needs --tau in (0,1)"
                                    : "--tau applies to --kind comp only");
    DiscreteMeasure nu = comp ? compression_marginal(a.tau) : parse_measure(a.nu);
    auto cost = comp ? CostSpec::compression(a.z, a.tau)
                     : (kind == ConvolutionKind::additive ? CostSpec::additive(a.z)
                                                          : CostSpec::multiplicative(a.z));
    auto sol = sinkhorn(build_kernel(cost, mu, nu), mu, nu, a.tol);
    double value = ot_value(sol, cost, mu, nu);
    SubordinationSolution sub = comp ? solve_compression(mu, a.tau, a.z)
                                     : (kind == ConvolutionKind::additive
                                            ? solve_additive(mu, nu, a.z)
                                            : solve_multiplicative(mu, nu, a.z));
    // compression carries the factor tau on both comparisons
    double sub_value = comp ? a.tau * free_log_potential(sub, mu)
                            : free_log_potential(sub, mu, nu);
    double cauchy = coupling_cauchy(sol, cost, mu, nu);
    double sub_cauchy = comp ? a.tau * free_cauchy(sub) : free_cauchy(sub);
    if (comp) report["tau"] = a.tau;
    report["value"] = value;
    report["subordination_value"] = sub_value;
    report["gap"] = std::abs(value - sub_value);
    report["cauchy"] = cauchy;
    report["subordination_cauchy"] = sub_cauchy;
    report["cauchy_gap"] = std::abs(cauchy - sub_cauchy);
    report["coupling"] = coupling_to_json(sol);

    std::vector<std::vector<double>> table;
    for (std::size_t i = 0; i < sol.rows; ++i)
        for (std::size_t j = 0; j < sol.cols; ++j)
            table.push_back({mu.atoms()[i], nu.atoms()[j], sol.pi[i * sol.cols + j]});
    emit(report, a.csv, to_csv({"x", "y", "pi"}, table));
    return 0;
}

struct QuadratureArgs {
    std::string op, mu, nu, csv;
    int n = 4, d = 2, k = 0;
    double z = 0.0;
    std::uint64_t samples = 20000, seed = 1;
    unsigned threads = 1;
};

int run_quadrature(const QuadratureArgs& a) {
    require(a.n >= 1 && a.n <= 64, "--n must be in [1, 64]");
    require(a.d >= 2 && a.d <= 3, "--d must be 2 or 3");
    auto mu = parse_measure(a.mu);
    auto nu = parse_measure(a.nu);
    auto a_roots = detail::quantile_grid(mu, a.n);

    double exact = 0.0;
    McEstimate est;
    json report;
    report["schema"] = 1;
    report["op"] = a.op;
    report["n"] = a.n;
    int k = 0;
    if (a.op == "minor") {
        k = a.k > 0 ? a.k : std::max(1, a.n / a.d);
        report["k"] = k;
        exact = finite_free_compress(MonicPoly::from_roots(a_roots),
                                     static_cast<unsigned>(k))(a.z);
        est = mc_quadrature(a_roots, {}, MatrixOp::minor(k), a.z, a.samples, a.seed,
                            a.threads);
    } else {
        report["d"] = a.d;
        BinaryOp op = a.op == "add" ? BinaryOp::add : BinaryOp::mul;
        std::vector<std::vector<double>> lists{a_roots};
        for (int j = 1; j < a.d; ++j) lists.push_back(detail::quantile_grid(nu, a.n));
        if (a.d == 2) {
            exact = perm_expected_charpoly_at(lists[0], lists[1], op, a.z);
        } else {
            require(a.n <= 6, "exact permutation side needs N <= 6 when d = 3");
            exact = enum_perm_quadrature(lists, op, a.z);
        }
        est = mc_quadrature(lists, op, a.z, a.samples, a.seed, a.threads);
    }
    double z_score = est.stderr_ > 0.0 ? (est.mean - exact) / est.stderr_
                                       : (est.mean == exact ? 0.0 : INFINITY);
    require_finite(z_score, "z-score");
    report["z"] = a.z;
    report["samples"] = a.samples;
    report["seed"] = a.seed;
    report["threads"] = a.threads;
    report["exact"] = exact;
    report["mc_mean"] = est.mean;
    report["mc_stderr"] = est.stderr_;
    report["z_score"] = z_score;
    emit(report, a.csv,
         to_csv({"exact", "mc_mean", "mc_stderr", "z_score"},
                {{exact, est.mean, est.stderr_, z_score}}));
    return 0;
}

struct FinitefreeArgs {
    std::string op, mu, nu, degrees = "8,16,32,64", csv;
    int n = 8, k = 0;
    double z = 0.0;
    bool has_z = false;
};

int run_finitefree(const FinitefreeArgs& a) {
    require(a.n >= 1 && a.n <= 64, "--n must be in [1, 64]");
    auto kind = parse_kind(a.op);
    auto mu = parse_measure(a.mu);
    auto nu = parse_measure(a.nu);
    bool comp = kind == ConvolutionKind::compression;
    int k = comp ? (a.k > 0 ? a.k : std::max(1, a.n / 2)) : 0;
    if (comp) require(k >= 1 && k <= a.n, "--k must be in [1, n]");

    auto roots_at = [&](int deg, int kk) {
        auto base = detail::quantile_grid(mu, deg);
        if (comp) return convolution_roots(base, {}, kind, static_cast<unsigned>(kk));
        return convolution_roots(base, detail::quantile_grid(nu, deg), kind);
    };
    auto roots = roots_at(a.n, k);
    auto poly = MonicPoly::from_roots(roots);

    json report;
    report["schema"] = 1;
    report["op"] = a.op;
    report["n"] = a.n;
    if (comp) report["k"] = k;
    report["coeffs"] = poly.coeffs;
    report["roots"] = roots;

    std::string csv;
    if (a.has_z) {
        auto degrees = parse_int_list(a.degrees, "--degrees");
        double tau = comp ? static_cast<double>(k) / static_cast<double>(a.n) : 0.0;
        auto rows = asymptotic_logdet_check(mu, nu, kind, a.z, degrees, tau);
        json table = json::array();
        std::vector<std::vector<double>> csv_rows;
        std::vector<double> prev;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto deg_roots = roots_at(rows[i].n, comp ? static_cast<int>(std::llround(
                                                            tau * rows[i].n))
                                                      : 0);
            double w1_step =
                i == 0 ? 0.0
                       : wasserstein1(make_uniform_measure(deg_roots),
                                      make_uniform_measure(prev));
            prev = deg_roots;
            json row;
            row["n"] = rows[i].n;
            row["value"] = rows[i].value;
            row["error"] = rows[i].error;
            row["w1_from_previous"] = w1_step;
            table.push_back(row);
            csv_rows.push_back({static_cast<double>(rows[i].n), rows[i].value,
                                rows[i].error, w1_step});
        }
        report["z"] = a.z;
        report["degrees"] = table;
        csv = to_csv({"N", "value", "error", "w1_from_previous"}, csv_rows);
    }
    emit(report, a.csv, csv);
    return 0;
}

struct LdpArgs {
    std::string hist = "flat", sizes, csv;
    int n = 0, m = 2, d = 2;
};

int run_ldp(const LdpArgs& a) {
    bool diag = a.hist == "diag";
    auto h = diag ? concentrated_histogram(a.n, a.m, a.d)
                  : flat_histogram(a.n, a.m, a.d);
    json report;
    report["schema"] = 1;
    report["n"] = a.n;
    report["m"] = a.m;
    report["d"] = a.d;
    report["hist"] = a.hist;
    report["count"] = tuple_count(h).str();
    report["log_probability"] = block_log_probability(h);
    report["rate"] = rate_functional(h);
    report["gap"] = block_log_probability(h) + rate_functional(h);

    std::string csv;
    if (!a.sizes.empty()) {
        auto sizes = parse_int_list(a.sizes, "--sizes");
        auto rows = ldp_convergence(sizes, a.m, a.d, diag);
        json table = json::array();
        for (const auto& r : rows) {
            json row;
            row["n"] = r.N;
            row["log_probability"] = r.log_probability;
            row["rate"] = r.rate;
            row["gap"] = r.gap;
            table.push_back(row);
        }
        report["sizes"] = table;
        csv = to_csv(rows);
    }
    emit(report, a.csv, csv);
    return 0;
}

struct VerifyArgs {
    std::string filter;
    std::uint64_t seed = 7;
};

int run_verify(const VerifyArgs& a) {
    auto results = run_acceptance(a.seed, a.filter);
    std::fputs(render_report(results).c_str(), stdout);
    for (const auto& r : results)
        if (!r.passed) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"free probability toolkit: free convolutions and compressions via "
                 "entropic optimal transport, subordination, finite free polynomials, "
                 "matrix quadrature and permutation counting"};
    app.require_subcommand(1);

    FreeconvArgs fc;
    auto* freeconv = app.add_subcommand(
        "freeconv", "solve the subordination equations at z and report G and the "
                    "log potential");
    freeconv->add_option("--kind", fc.kind, "operation: add, mul or comp")
        ->required()
        ->check(CLI::IsMember({"add", "mul", "comp"}));
    freeconv->add_option("--mu", fc.mu, "first measure (preset, file or -)")->required();
    auto* fc_nu = freeconv->add_option("--nu", fc.nu, "second measure");
    auto* fc_tau =
        freeconv->add_option("--tau", fc.tau, "compression fraction in (0,1)");
    auto* fc_grp = freeconv->add_option_group("evaluation point");
    auto* fc_z = fc_grp->add_option("--z", fc.z, "evaluation point above the support");
    fc_grp->add_option("--z-grid", fc.zgrid, "lo,hi,count table of evaluation points");
    fc_grp->require_option(1);
    freeconv->add_option("--csv", fc.csv, "write the z-grid table to this file");

    OtsolveArgs ot;
    auto* otsolve = app.add_subcommand(
        "otsolve", "run Sinkhorn scaling and report the coupling next to the "
                   "subordination answer");
    otsolve->add_option("--kind", ot.kind, "operation: add, mul or comp")
        ->required()
        ->check(CLI::IsMember({"add", "mul", "comp"}));
    otsolve->add_option("--mu", ot.mu, "first measure");
    auto* ot_nu = otsolve->add_option("--nu", ot.nu, "second measure");
    auto* ot_tau = otsolve->add_option("--tau", ot.tau, "compression fraction");
    otsolve->add_option("--z", ot.z, "evaluation point")->required();
    otsolve->add_option("--tol", ot.tol, "marginal residual tolerance");
    otsolve->add_option("--marginal", ot.marginals,
                        "multimarginal mode: repeat for each marginal measure");
    otsolve->add_option("--csv", ot.csv, "write the coupling table to this file");

    QuadratureArgs qd;
    auto* quadrature = app.add_subcommand(
        "quadrature", "unitary Monte Carlo expected characteristic polynomial "
                      "against the exact permutation side");
    quadrature->add_option("--op", qd.op, "matrix model: add, mul or minor")
        ->required()
        ->check(CLI::IsMember({"add", "mul", "minor"}));
    quadrature->add_option("--n", qd.n, "matrix size")->required();
    quadrature->add_option("--z", qd.z, "evaluation point")->required();
    quadrature->add_option("--d", qd.d, "number of rotated summands or factors");
    quadrature->add_option("--k", qd.k, "retained minor size (default max(1, n/d))");
    quadrature->add_option("--mu", qd.mu, "measure whose n-quantile grid seeds list 0")
        ->default_val("bern");
    quadrature->add_option("--nu", qd.nu, "measure for the remaining lists")
        ->default_val("bern");
    quadrature->add_option("--samples", qd.samples, "Monte Carlo samples");
    quadrature->add_option("--seed", qd.seed, "RNG seed");
    quadrature->add_option("--threads", qd.threads, "worker threads (chunked seeds)");
    quadrature->add_option("--csv", qd.csv, "write the summary row to this file");

    FinitefreeArgs ff;
    auto* finitefree = app.add_subcommand(
        "finitefree", "degree-n convolution polynomial, its roots and a "
                      "degree table of values and W1 steps");
    finitefree->add_option("--op", ff.op, "operation: add, mul or comp")
        ->required()
        ->check(CLI::IsMember({"add", "mul", "comp"}));
    finitefree->add_option("--n", ff.n, "polynomial degree");
    finitefree->add_option("--k", ff.k, "compression size (default n/2)");
    finitefree->add_option("--mu", ff.mu, "first measure")->default_val("bern");
    finitefree->add_option("--nu", ff.nu, "second measure")->default_val("bern");
    auto* ff_z = finitefree->add_option(
        "--z", ff.z, "evaluation point; adds the degree table against the free value");
    finitefree->add_option("--degrees", ff.degrees, "comma list for the degree table");
    finitefree->add_option("--csv", ff.csv, "write the degree table to this file");

    LdpArgs ld;
    auto* ldp = app.add_subcommand(
        "ldp", "exact permutation tuple counts and the entropy rate of a block "
               "histogram");
    ldp->add_option("--n", ld.n, "permutation size")->required();
    ldp->add_option("--m", ld.m, "blocks per axis");
    ldp->add_option("--d", ld.d, "number of permutations");
    ldp->add_option("--hist", ld.hist, "histogram family: flat or diag")
        ->check(CLI::IsMember({"flat", "diag"}));
    ldp->add_option("--sizes", ld.sizes, "comma list of N for a convergence table");
    ldp->add_option("--csv", ld.csv, "write the convergence table to this file");

    VerifyArgs vf;
    auto* verify = app.add_subcommand(
        "verify", "run the acceptance checks and print one PASS/FAIL line each");
    verify->add_option("--seed", vf.seed, "seed for the randomized checks");
    verify->add_option("--filter", vf.filter, "run only checks whose name contains this");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (freeconv->parsed()) {
            fc.has_nu = fc_nu->count() > 0;
            fc.has_tau = fc_tau->count() > 0;
            fc.has_z = fc_z->count() > 0;
            return run_freeconv(fc);
        }
        if (otsolve->parsed()) {
            ot.has_nu = ot_nu->count() > 0;
            ot.has_tau = ot_tau->count() > 0;
            return run_otsolve(ot);
        }
        if (quadrature->parsed()) return run_quadrature(qd);
        if (finitefree->parsed()) {
            ff.has_z = ff_z->count() > 0;
            return run_finitefree(ff);
        }
        if (ldp->parsed()) return run_ldp(ld);
        return run_verify(vf);
    } catch (const convergence_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
