#include "chemo/cli.hpp"

#include "chemo/gradient_flow.hpp"

#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#ifndef CHEMO_VERSION
#define CHEMO_VERSION "0.0.0"
#endif

namespace chemo {

namespace {

std::string num(double x) { return format_number(x); }
std::string num(long double x) { return format_number(static_cast<double>(x)); }
std::string num(long x) { return std::to_string(x); }
std::string num(int x) { return std::to_string(x); }
std::string flag(bool b) { return b ? "true" : "false"; }

std::string csv_cell(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

class Writer {
public:
    Writer(const RunConfig& cfg, const RunContext& ctx) : header_(output_header(cfg, ctx)), dir_(ctx.out_dir) {}

    void write(const std::string& name, const Table& t) const
    {
        const auto path = dir_ / name;
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
        os << t.render(header_);
        if (!os)
            throw Error(ErrorCode::InvalidArgument, "write failed for " + path.string());
    }

private:
    std::string header_;
    std::filesystem::path dir_;
};

void classify_cmd(const RunConfig& cfg, const Writer& out)
{
    const auto v = cfg.params.theta == -1 ? classify_conflict(cfg.params) : classify_conflict_free(cfg.params);
    Table t;
    t.columns = {"m1", "m2", "verdict", "rule_fired", "lambda", "lambda1", "lambda2"};
    std::vector<std::string> row = {num(v.m1),        num(v.m2),           std::string(to_string(v.verdict)),
                                    num(v.rule),      num(v.lambda.lambda), num(v.lambda.lambda1),
                                    num(v.lambda.lambda2)};
    for (const auto& ineq : v.fired) {
        t.columns.push_back(ineq.name);
        row.push_back(num(ineq.value));
    }
    t.add(std::move(row));
    out.write("classify.csv", t);
}

void sweep_cmd(const RunConfig& cfg, const RunContext& ctx, const Writer& out)
{
    const auto s = sweep(cfg.params, cfg.m1_range, cfg.m2_range, cfg.resolution, ctx.threads);
    Table cells;
    cells.columns = {"m1", "m2", "verdict", "lambda", "lambda1", "lambda2", "rule_fired"};
    for (const auto& v : s.cells)
        cells.add({num(v.m1), num(v.m2), std::string(to_string(v.verdict)), num(v.lambda.lambda),
                   num(v.lambda.lambda1), num(v.lambda.lambda2), num(v.rule)});
    out.write("sweep.csv", cells);

    Table curves;
    curves.columns = {"curve", "m1", "m2"};
    for (const auto& c : s.curves)
        for (const auto& [m1, m2] : c.points)
            curves.add({c.name, num(m1), num(m2)});
    out.write("curves.csv", curves);

    Table meta;
    meta.columns = {"resolution", "cells", "rule12_overlaps", "ellipse"};
    meta.add({num(s.resolution), num(static_cast<long>(s.cells.size())), num(s.rule12_overlaps), flag(s.ellipse)});
    out.write("sweep_summary.csv", meta);
}

void steady_cmd(const RunConfig& cfg, const Writer& out)
{
    using L = long double;
    const auto grid = make_grid<L>(cfg.grid_n, cfg.grid_kind);
    // single species: refuse supercritical masses instead of iterating to divergence
    const auto sol = cfg.params.m2 == 0.0 ? solve_single<L>(cfg.params.m1, cfg.params.alpha, grid, cfg.solve)
                                          : solve_pair<L>(cfg.params, grid, cfg.solve);
    const auto k = pair_coupling<L>(cfg.params, L(cfg.params.m1), L(cfg.params.m2));
    const auto d = detail::densities(grid, k, {sol.u1.values(), sol.u2.values()});
    const Vec<L> lap1 = laplacian(sol.u1), lap2 = laplacian(sol.u2);

    Table t;
    t.columns = {"r", "u1", "u2", "rho1", "rho2", "residual1", "residual2"};
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const bool interior = i < grid.cells();
        const L r1 = interior ? std::abs(lap1[i] + d.rho[0][i]) : L(0);
        const L r2 = interior ? std::abs(lap2[i] + d.rho[1][i]) : L(0);
        t.add({num(grid[i]), num(sol.u1[i]), num(sol.u2[i]), num(d.rho[0][i]), num(d.rho[1][i]), num(r1), num(r2)});
    }
    out.write("steady.csv", t);

    const auto [res1, res2] = residual(sol, cfg.params);
    Table s;
    s.columns = {"residual1", "residual2", "iterations", "lambda1", "lambda2", "u1_0", "u2_0"};
    s.add({num(res1), num(res2), num(sol.iterations), num(sol.multipliers[0]), num(sol.multipliers[1]),
           num(sol.u1[0]), num(sol.u2[0])});
    out.write("steady_summary.csv", s);
}

void flow_cmd(const RunConfig& cfg, const RunContext& ctx, const Writer& out)
{
    const auto& p = cfg.params;
    const auto grid = make_grid<double>(cfg.grid_n, cfg.grid_kind);
    const auto rho1 = make_density(cfg.density, grid, p.m1, ctx.seed);
    const auto rho2 = p.m2 > 0.0 ? make_density(cfg.density, grid, p.m2, ctx.seed + 1)
                                 : RadialField<double>::zero(grid, FieldKind::Density);
    StepOptions opt;
    opt.energy_tol = cfg.flow.energy_tol;
    FlowState<double> init = [&] {
        switch (flow_case(cfg.flow)) {
        case FlowCase::ParabolicEllipticTwo: return pe2_state(rho1, p, opt);
        case FlowCase::ParabolicEllipticFull: return full_state(rho1, rho2, p);
        case FlowCase::Exponential: break;
        }
        return exp_state(inv_laplacian(rho1), inv_laplacian(rho2), p);
    }();
    const auto s = run_flow(init, p, cfg.flow, opt);

    Table trace;
    trace.columns = {"t", "m1", "m2", "energy", "sup_rho1"};
    for (std::size_t k = 0; k < s.energy_trace.size(); ++k)
        trace.add({num(s.mass_trace[k].t), num(s.mass_trace[k].m1), num(s.mass_trace[k].m2),
                   num(s.energy_trace[k].value), num(s.peak_trace[k].value)});
    out.write("flow_trace.csv", trace);

    Table fin;
    fin.columns = {"r", "rho1", "rho2", "u1", "u2"};
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        fin.add({num(grid[i]), num(s.rho1[i]), num(s.rho2 ? (*s.rho2)[i] : 0.0), num(s.u1[i]), num(s.u2[i])});
    out.write("flow_final.csv", fin);

    Table sum;
    sum.columns = {"t", "accepted", "rejected", "steady", "monitored", "energy", "warnings"};
    std::string warnings;
    for (auto w : s.warnings)
        warnings += (warnings.empty() ? "" : ";") + std::string(to_string(w));
    sum.add({num(s.t), num(s.accepted), num(s.rejected), flag(s.steady), flag(s.monitored), num(s.energy), warnings});
    out.write("flow_summary.csv", sum);
}

void blowdown_cmd(const RunConfig& cfg, const RunContext& ctx, const Writer& out)
{
    const auto& p = cfg.params;
    const auto grid = make_grid<double>(cfg.grid_n, cfg.grid_kind);
    const auto rho = make_density(cfg.density, grid, p.m1, ctx.seed);
    const auto w = (p.gamma > 0.0 && p.m2 > 0.0) ? minimize_w(rho, p, cfg.solve)
                                                  : RadialField<double>::zero(grid, FieldKind::Potential);
    const BlowdownFamily<double> fam{rho, w, cfg.psis, cfg.mode};

    Table ids;
    ids.columns = {"psi", "term", "predicted", "measured", "applicable", "asymptotic"};
    for (const auto& r : verify_identities(fam, p))
        ids.add({num(r.psi), r.term, num(r.predicted), num(r.measured), flag(r.applicable), flag(r.asymptotic)});
    out.write("blowdown_identities.csv", ids);

    if (cfg.psis.size() >= 4) {
        const auto est = slope_estimate(fam, p);
        Table sl;
        sl.columns = {"ln_psi", "f_m", "fitted"};
        for (std::size_t k = 0; k < est.samples.size(); ++k)
            sl.add({num(est.samples[k].first), num(est.samples[k].second), flag(k >= 2)});
        out.write("blowdown_slope.csv", sl);
        Table fit;
        fit.columns = {"slope", "intercept", "predicted", "regime"};
        fit.add({num(est.slope), num(est.intercept), num(est.predicted),
                 est.regime == SlopeRegime::LambdaOnePositive ? "lambda1_positive" : "lambda2"});
        out.write("blowdown_fit.csv", fit);
    }

    const auto u = inv_laplacian(rho);
    Table mt;
    mt.columns = {"psi", "mt_functional"};
    for (double psi : cfg.psis)
        mt.add({num(psi), num(mt_blowdown(u, p.m1, p.alpha, psi))});
    out.write("blowdown_mt.csv", mt);
}

void oracle_cmd(const RunConfig& cfg, const Writer& out)
{
    Table t;
    t.columns = {"psi", "ratio", "limit", "rel_err", "energy", "energy_drift"};
    const double limit = std::pow(cfg.lemw.m2 / (2.0 * kPi<double>), 2);
    for (double psi : cfg.oracle_psis) {
        LemwParams lp = cfg.lemw;
        lp.psi = psi;
        const double e = match_energy(lp);
        const auto tr = integrate_veq(lp, cfg.oracle_steps);
        const double ratio = tr.half_integral / (-std::log(psi) / 2.0);
        t.add({num(psi), num(ratio), num(limit), num(std::abs(ratio - limit) / limit), num(e), num(tr.energy_drift)});
    }
    out.write("oracle.csv", t);
}

void functional_cmd(const RunConfig& cfg, const RunContext& ctx, const Writer& out)
{
    const auto& p = cfg.params;
    const auto grid = make_grid<double>(cfg.grid_n, cfg.grid_kind);
    const auto rho1 = make_density(cfg.density, grid, p.m1, ctx.seed);
    const auto rho2 = p.m2 > 0.0 ? make_density(cfg.density, grid, p.m2, ctx.seed + 1)
                                 : RadialField<double>::zero(grid, FieldKind::Density);
    const auto u1 = inv_laplacian(rho1), u2 = inv_laplacian(rho2);

    Table t;
    t.columns = {"functional", "part", "value"};
    auto report = [&](const std::string& name, const FunctionalReport<double>& r) {
        t.add({name, "entropy1", num(r.entropy1)});
        t.add({name, "entropy2", num(r.entropy2)});
        t.add({name, "interaction", num(r.interaction)});
        t.add({name, "dirichlet", num(r.dirichlet)});
        t.add({name, "cross", num(r.cross)});
        t.add({name, "log_terms", num(r.log_terms)});
        t.add({name, "total", num(r.total)});
    };
    report("free_energy", free_energy(rho1, p));
    report("bar_f", bar_f(rho1, p, cfg.solve).first);
    report("h_theta_under", h_theta_under(rho1, rho2, p));
    report("h_theta_bar", h_theta_bar(u1, u2, p));
    t.add({"mt_functional", "total", num(mt_functional(u1, p.m1, p.alpha))});
    out.write("functional.csv", t);
}

} // namespace

int exit_code(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::SolverDiverged:
    case ErrorCode::Oscillation:
    case ErrorCode::Stalled:
    case ErrorCode::StepRejected:
    case ErrorCode::MonotonicityLost:
        return kExitDiverged;
    default:
        return kExitConfig;
    }
}

RadialField<double> make_density(const DensitySpec& spec, const RadialGrid<double>& grid, double m, std::uint64_t seed)
{
    std::array<double, 4> c{};
    if (spec.perturb > 0.0) {
        std::mt19937_64 rng(seed);
        for (auto& x : c)
            x = std::ldexp(static_cast<double>(rng() >> 11), -53) / 2.0 - 0.25;  // uniform in [-1/4, 1/4)
    }
    const double w2 = spec.width * spec.width;
    const double pi = kPi<double>;
    auto f = RadialField<double>::from_function(grid, [&](double r) {
        double base = 1.0;
        if (spec.profile == Profile::Gaussian)
            base = std::exp(-r * r / w2);
        else if (spec.profile == Profile::Bubble)
            base = 1.0 / ((1.0 + r * r / w2) * (1.0 + r * r / w2));
        double wiggle = 1.0;
        for (int k = 0; k < 4; ++k)
            wiggle += spec.perturb * c[k] * std::cos((k + 1) * pi * r);
        return base * wiggle;
    });
    return project_density(f, m);
}

std::string Table::render(const std::string& header) const
{
    std::ostringstream os;
    os << header;
    for (std::size_t k = 0; k < columns.size(); ++k)
        os << (k ? "," : "") << csv_cell(columns[k]);
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k)
            os << (k ? "," : "") << csv_cell(row[k]);
        os << '\n';
    }
    return os.str();
}

std::string output_header(const RunConfig& cfg, const RunContext& ctx)
{
    std::ostringstream os;
    os << "# chemo " << CHEMO_VERSION << '\n';
    os << "# seed = " << ctx.seed << '\n';
    std::istringstream lines(echo_config(cfg));
    for (std::string line; std::getline(lines, line);)
        os << "# " << line << '\n';
    return os.str();
}

int run(const RunConfig& cfg, const RunContext& ctx, std::ostream& err)
{
    try {
        std::filesystem::create_directories(ctx.out_dir);
        set_default_threads(ctx.threads);
        const Writer out(cfg, ctx);
        switch (cfg.command) {
        case Command::Classify: classify_cmd(cfg, out); break;
        case Command::Sweep: sweep_cmd(cfg, ctx, out); break;
        case Command::Steady: steady_cmd(cfg, out); break;
        case Command::Flow: flow_cmd(cfg, ctx, out); break;
        case Command::Blowdown: blowdown_cmd(cfg, ctx, out); break;
        case Command::Oracle: oracle_cmd(cfg, out); break;
        case Command::Functional: functional_cmd(cfg, ctx, out); break;
        }
        return kExitOk;
    }
    catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.code());
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitOther;
    }
}

int run_file(const std::filesystem::path& config, const RunContext& ctx, std::ostream& err)
{
    std::ifstream is(config, std::ios::binary);
    if (!is) {
        err << "error: cannot read " << config.string() << '\n';
        return kExitConfig;
    }
    std::stringstream buf;
    buf << is.rdbuf();
    RunConfig cfg;
    try {
        cfg = parse_config(buf.str());
    }
    catch (const Error& e) {
        err << "error: " << config.string() << ": " << e.what() << '\n';
        return kExitConfig;
    }
    return run(cfg, ctx, err);
}

} // namespace chemo
