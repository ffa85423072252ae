// Command-line front end: spectra, g2 scans, delayed coherence, material
// estimates. See README.md for the config format and output layout.

#include "trionpol/config.hpp"
#include "trionpol/lindblad.hpp"
#include "trionpol/manifold.hpp"
#include "trionpol/materials.hpp"
#include "trionpol/sweep.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace trionpol;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitTruncation = 4;

std::string fmt(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ConfigError(path + ": cannot open config file");
    return parse_config(is, path);
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError(path.string() + ": cannot open for writing");
    os << content;
}

fs::path out_path(const RunConfig& cfg, const std::string& name)
{
    fs::path dir(cfg.output.dir);
    fs::create_directories(dir);
    return dir / (cfg.output.prefix + "_" + name);
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    bool dump = false;
};

RunConfig prepare(const CommonArgs& args)
{
    RunConfig cfg = load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.output.dir = args.out_dir;
    return cfg;
}

int cmd_spectrum(const RunConfig& cfg, const std::vector<double>& alpha_sq,
                 double omega_min, double omega_max, int points)
{
    const ModelParams params = cfg.resolved_model();
    SpectrumEngine engine(params);

    double lo = omega_min, hi = omega_max;
    const double hwhm = 0.5 * (params.gamma_c + params.gamma_t);
    if (!(hi > lo)) {
        // cover every transition of the strongest pulse
        int n_hi = 1;
        for (double a2 : alpha_sq) n_hi = std::max(n_hi, SpectrumEngine::poisson_n_hi(a2));
        const auto [slo, shi] = engine.line_span(n_hi);
        lo = slo - 6.0 * hwhm;
        hi = shi + 6.0 * hwhm;
    }
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(points, lo, hi);

    std::ostringstream peaks_csv;
    peaks_csv << "n_photons,peak_omega,peak_height\n";
    int k = 0;
    for (double a2 : alpha_sq) {
        const SpectrumResult s =
            engine.spectrum(a2, grid, std::nullopt, ClipPolicy::allow);
        std::ostringstream os;
        os << "omega,intensity\n";
        for (Eigen::Index i = 0; i < grid.size(); ++i)
            os << fmt(s.omega_grid[i]) << ',' << fmt(s.intensity[i]) << '\n';
        char name[64];
        std::snprintf(name, sizeof(name), "spectrum_%03d.csv", k++);
        write_file(out_path(cfg, name), os.str());
        if (s.clipped)
            std::cerr << "warning: alpha_sq=" << a2 << ": grid clips part of the spectrum\n";
        for (const Peak& p : detect_peaks(s.omega_grid, s.intensity, cfg.solver.peak_prominence))
            peaks_csv << fmt(a2) << ',' << fmt(p.omega) << ',' << fmt(p.height) << '\n';
    }
    write_file(out_path(cfg, "peaks.csv"), peaks_csv.str());
    std::cout << "wrote " << alpha_sq.size() << " spectra + peak track to " << cfg.output.dir
              << '\n';
    return 0;
}

int cmd_g2scan(const RunConfig& cfg, double from, double to, int points, int threads)
{
    ScanSpec spec;
    spec.axis = ScanAxis::delta;
    spec.base = cfg.resolved_model();
    if (!spec.base.pump_p) throw ConfigError("g2scan: config sets no drive (pump_p)");
    spec.trunc = cfg.trunc;
    spec.max_enlarge = cfg.solver.max_enlarge;
    spec.grid.resize(points);
    for (int i = 0; i < points; ++i)
        spec.grid[i] = from + (to - from) * i / std::max(points - 1, 1);

    const ScanResult res = run_scan(spec, threads);
    write_file(out_path(cfg, "g2scan.csv"), scan_csv(res));
    write_file(out_path(cfg, "g2scan_manifest.txt"), res.manifest);
    for (const ScanRow& r : res.rows)
        if (r.status != "ok") std::cerr << "point " << r.axis_value << ": " << r.status << '\n';
    std::cout << "wrote " << res.rows.size() << " rows to " << cfg.output.dir << '\n';
    return 0;
}

int cmd_g2tau(const RunConfig& cfg, double tau_max, int points)
{
    const ModelParams params = cfg.resolved_model();
    if (!params.pump_p || !params.omega_p)
        throw ConfigError("g2tau: config must set pump_p and delta (or omega_p)");

    const SteadyPoint pt = solve_steady_point(params, cfg.trunc, cfg.solver.max_enlarge);
    const Liouvillian l = make_liouvillian(params, pt.used);
    const SparseOperator c = photon_lowering(pt.used, params.n_s);

    std::vector<double> taus(points);
    for (int i = 0; i < points; ++i)
        taus[i] = tau_max * (i + 1) / static_cast<double>(points);
    const G2Result g2 = g2_tau(l, pt.rho, c, taus, cfg.solver.ode_tol);

    std::ostringstream os;
    os << "tau,g2\n";
    os << fmt(0.0) << ',' << fmt(g2.g2_zero) << '\n';
    for (size_t i = 0; i < taus.size(); ++i)
        os << fmt(taus[i]) << ',' << fmt(g2.g2_tau[i]) << '\n';
    write_file(out_path(cfg, "g2tau.csv"), os.str());

    std::ostringstream sum;
    sum << "delta,gc,Ns,P,gamma_c,gamma_t,n_cav,g2_zero\n"
        << steady_summary_line(params, pt.n_cav, pt.g2) << '\n';
    write_file(out_path(cfg, "steady_summary.csv"), sum.str());
    std::cout << "g2(0) = " << fmt(g2.g2_zero) << ", n_cav = " << fmt(g2.n_cav) << '\n';
    return 0;
}

int cmd_materials(const RunConfig& cfg)
{
    if (!cfg.material) throw ConfigError("materials: config needs a [material] section");
    const MaterialConfig& mc = *cfg.material;
    const double chi = chi_t(mc.mp.lambda1_nm, mc.mp.lambda2_nm);
    const double g0_mev = g0(mc.mp);
    const ModelParams params = cfg.resolved_model();
    const double omega_l =
        lower_polariton(params.omega_cav, params.omega_t, params.omega_rabi);

    std::printf("%-22s %s\n", "g0 [meV]", fmt(g0_mev).c_str());
    std::printf("%-22s %s\n", "chi_T", fmt(chi).c_str());
    std::printf("%-22s %s\n", "g_c [meV]", fmt(params.g_c()).c_str());
    std::printf("%-22s %s\n", "Omega [meV]", fmt(params.omega_rabi).c_str());
    std::printf("%-22s %d\n", "N_s", params.n_s);
    std::printf("%-22s %s\n", "omega_L - omega_cav", fmt(omega_l - params.omega_cav).c_str());

    std::ostringstream os;
    os << "g0_mev,chi_t,gc_mev,omega_rabi_mev,n_s,omega_l_offset_mev\n"
       << fmt(g0_mev) << ',' << fmt(chi) << ',' << fmt(params.g_c()) << ','
       << fmt(params.omega_rabi) << ',' << params.n_s << ','
       << fmt(omega_l - params.omega_cav) << '\n';
    std::cout << os.str();
    write_file(out_path(cfg, "materials.csv"), os.str());
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& axis_name, double from, double to,
              int points, bool minimize, const std::string& window, int threads)
{
    ScanSpec spec;
    if (axis_name == "delta")
        spec.axis = ScanAxis::delta;
    else if (axis_name == "gc")
        spec.axis = ScanAxis::gc;
    else if (axis_name == "ns")
        spec.axis = ScanAxis::ns;
    else if (axis_name == "pump")
        spec.axis = ScanAxis::pump;
    else
        throw ConfigError("sweep: unknown axis '" + axis_name + "'");

    spec.base = cfg.resolved_model();
    if (!spec.base.pump_p) throw ConfigError("sweep: config sets no drive (pump_p)");
    if (spec.axis != ScanAxis::delta && !spec.base.omega_p && !minimize)
        throw ConfigError("sweep: config must set delta (or omega_p) for this axis");
    spec.trunc = cfg.trunc;
    spec.max_enlarge = cfg.solver.max_enlarge;
    spec.grid.resize(points);
    for (int i = 0; i < points; ++i)
        spec.grid[i] = from + (to - from) * i / std::max(points - 1, 1);

    ScanResult res;
    if (!minimize) {
        res = run_scan(spec, threads);
    } else {
        spec.validate();
        res.manifest = scan_manifest(spec, cfg.solver.steady_tol, cfg.solver.ode_tol);
        res.manifest += "minimize: over_delta\nwindow: " + window + "\n";
        res.rows.resize(spec.grid.size());
        for (size_t i = 0; i < spec.grid.size(); ++i) {
            ScanRow& row = res.rows[i];
            row.axis_value = spec.grid[i];
            row.used = spec.trunc;
            try {
                const ModelParams p =
                    ScanSpec::apply_axis(spec.base, spec.axis, spec.grid[i]);
                std::vector<DetuningWindow> windows;
                if (window == "unconventional" || window == "both")
                    windows.push_back(unconventional_window(p));
                if (window == "conventional" || window == "both")
                    windows.push_back(conventional_window(p));
                if (windows.empty())
                    throw ConfigError("sweep: unknown window '" + window + "'");
                MinimizeResult best;
                bool first = true;
                for (const DetuningWindow& w : windows) {
                    const MinimizeResult m = minimize_g2(p, w.lo, w.hi, spec.trunc,
                                                         spec.max_enlarge, threads);
                    if (first || m.g2_min < best.g2_min) best = m;
                    first = false;
                }
                row.g2_zero = best.g2_min;
                row.n_cav = best.n_cav_at_min;
                row.delta_opt = best.delta_opt;
                if (best.no_blockade) row.status = "no_blockade";
            } catch (const TruncationError&) {
                row.status = "truncation_fail";
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                row.status = std::string("solver_error: ") + e.what();
            }
        }
    }
    write_file(out_path(cfg, "sweep.csv"), scan_csv(res));
    write_file(out_path(cfg, "sweep_manifest.txt"), res.manifest);
    std::cout << "wrote " << res.rows.size() << " rows to " << cfg.output.dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"trion-polariton cavity simulator"};
    app.require_subcommand(0, 1);

    CommonArgs args;
    app.add_option("--config", args.config_path, "config file (sectioned key=value)");
    app.add_option("--out", args.out_dir, "output directory (overrides [output] dir)");
    app.add_option("--threads", args.threads, "worker threads for scans")
        ->check(CLI::PositiveNumber);
    app.add_flag("--dump-config", args.dump, "print the normalized config and exit");

    auto* sp = app.add_subcommand("spectrum", "pulse-driven transmission spectra");
    std::vector<double> alpha_sq;
    double omega_min = 0.0, omega_max = 0.0;
    int sp_points = 2001;
    sp->add_option("--alpha", alpha_sq, "pulse strengths |alpha|^2")
        ->required()
        ->delimiter(',');
    sp->add_option("--omega-min", omega_min, "grid start (default: auto)");
    sp->add_option("--omega-max", omega_max, "grid end (default: auto)");
    sp->add_option("--points", sp_points, "grid points")->check(CLI::Range(3, 2000000));

    auto* gs = app.add_subcommand("g2scan", "g2(0) and n_cav vs pump detuning");
    double gs_from = -3.0, gs_to = 3.0;
    int gs_points = 121;
    gs->add_option("--from", gs_from, "detuning start");
    gs->add_option("--to", gs_to, "detuning end");
    gs->add_option("--points", gs_points, "grid points")->check(CLI::Range(2, 100000));

    auto* gt = app.add_subcommand("g2tau", "time-delayed second-order coherence");
    double tau_max = 10.0;
    int gt_points = 301;
    gt->add_option("--tau-max", tau_max, "largest delay")->required();
    gt->add_option("--points", gt_points, "number of delays")->check(CLI::Range(2, 100000));

    auto* mt = app.add_subcommand("materials", "device parameters -> model parameters");

    auto* sw = app.add_subcommand("sweep", "generic parameter scan");
    std::string axis = "delta", window = "both";
    double sw_from = 0.0, sw_to = 1.0;
    int sw_points = 11;
    bool minimize = false;
    sw->add_option("--axis", axis, "delta | gc | ns | pump")->required();
    sw->add_option("--from", sw_from, "axis start")->required();
    sw->add_option("--to", sw_to, "axis end")->required();
    sw->add_option("--points", sw_points, "grid points")->check(CLI::Range(1, 100000));
    sw->add_flag("--minimize", minimize, "per-point g2 minimization over detuning");
    sw->add_option("--window", window, "unconventional | conventional | both");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (args.config_path.empty()) throw ConfigError("--config is required");
        if (args.dump) {
            std::cout << dump_config(load_config(args.config_path));
            return 0;
        }
        const RunConfig cfg = prepare(args);
        if (sp->parsed()) return cmd_spectrum(cfg, alpha_sq, omega_min, omega_max, sp_points);
        if (gs->parsed()) return cmd_g2scan(cfg, gs_from, gs_to, gs_points, args.threads);
        if (gt->parsed()) return cmd_g2tau(cfg, tau_max, gt_points);
        if (mt->parsed()) return cmd_materials(cfg);
        if (sw->parsed())
            return cmd_sweep(cfg, axis, sw_from, sw_to, sw_points, minimize, window,
                             args.threads);
        throw ConfigError("no subcommand given (try --help)");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const TruncationError& e) {
        std::cerr << "truncation failure: " << e.what() << '\n';
        return kExitTruncation;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
