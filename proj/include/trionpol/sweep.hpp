#ifndef TRIONPOL_SWEEP_HPP
#define TRIONPOL_SWEEP_HPP

#include "trionpol/lindblad.hpp"
#include "trionpol/model.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace trionpol {

enum class ScanAxis { delta, gc, ns, pump };

inline const char* to_string(ScanAxis a)
{
    switch (a) {
        case ScanAxis::delta: return "delta";
        case ScanAxis::gc: return "gc";
        case ScanAxis::ns: return "ns";
        case ScanAxis::pump: return "pump";
    }
    return "?";
}

struct ScanSpec {
    ScanAxis axis = ScanAxis::delta;
    std::vector<double> grid;
    ModelParams base;
    Truncation trunc;
    bool want_g2_zero = true;
    bool want_n_cav = true;
    int max_enlarge = 3; // truncation_check retries, +4 per edge each time

    void validate() const
    {
        base.validate();
        trunc.validate();
        if (grid.empty()) throw std::invalid_argument("ScanSpec: empty grid");
        for (size_t i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1]) && !(grid[i] < grid[i - 1]))
                throw std::invalid_argument("ScanSpec: grid must be strictly monotone");
        for (size_t i = 2; i < grid.size(); ++i)
            if ((grid[1] > grid[0]) != (grid[i] > grid[i - 1]))
                throw std::invalid_argument("ScanSpec: grid must be strictly monotone");
        apply_axis(base, axis, grid.front()).validate();
        apply_axis(base, axis, grid.back()).validate();
    }

    static ModelParams apply_axis(ModelParams p, ScanAxis axis, double value)
    {
        switch (axis) {
            case ScanAxis::delta:
                p.set_delta(value);
                break;
            case ScanAxis::gc:
                p.set_g_c(value);
                break;
            case ScanAxis::ns: {
                const double r = std::floor(value + 0.5);
                if (std::abs(value - r) > 1e-9 || r < 1.0)
                    throw std::invalid_argument("scan: ns grid values must be positive integers");
                const double gc = p.g_c(); // hold the single-trion coupling fixed
                p.n_s = static_cast<int>(r);
                p.set_g_c(gc);
                break;
            }
            case ScanAxis::pump:
                p.pump_p = value;
                break;
        }
        return p;
    }
};

struct ScanRow {
    double axis_value = 0.0;
    double g2_zero = std::numeric_limits<double>::quiet_NaN();
    double n_cav = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> delta_opt; // filled by minimized scans
    Truncation used;
    std::string status = "ok"; // "ok" | "solver_error: ..." | "truncation_fail"
};

struct ScanResult {
    std::vector<ScanRow> rows;
    std::string manifest; // key:value provenance snapshot
};

namespace detail {

inline void run_parallel(size_t n_tasks, int n_threads, const std::function<void(size_t)>& fn)
{
    if (n_threads <= 1 || n_tasks <= 1) {
        for (size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    const int nw = std::min<int>(n_threads, static_cast<int>(n_tasks));
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) fn(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

} // namespace detail

inline std::string scan_manifest(const ScanSpec& spec, double steady_tol, double ode_tol)
{
    std::ostringstream os;
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << key << ": " << buf << '\n';
    };
    os << "axis: " << to_string(spec.axis) << '\n';
    os << "n_points: " << spec.grid.size() << '\n';
    put("grid_first", spec.grid.front());
    put("grid_last", spec.grid.back());
    os << "n_s: " << spec.base.n_s << '\n';
    put("omega_cav", spec.base.omega_cav);
    put("omega_t", spec.base.omega_t);
    put("omega_rabi", spec.base.omega_rabi);
    put("g_c", spec.base.g_c());
    put("gamma_c", spec.base.gamma_c);
    put("gamma_t", spec.base.gamma_t);
    put("pump_p", spec.base.pump_p.value_or(0.0));
    put("delta", spec.base.delta().value_or(0.0));
    os << "truncation_nc: " << spec.trunc.n_c_max << '\n';
    os << "truncation_nt: " << spec.trunc.n_t_max << '\n';
    os << "max_enlarge: " << spec.max_enlarge << '\n';
    put("steady_tol", steady_tol);
    put("ode_tol", ode_tol);
    return os.str();
}

// Steady-state observables over a parameter grid. Points fail independently;
// failures land in the row status and the scan carries on. Rows come back in
// grid order regardless of the worker count.
inline ScanResult run_scan(const ScanSpec& spec, int n_threads = 1)
{
    spec.validate();
    ScanResult res;
    res.rows.resize(spec.grid.size());
    res.manifest = scan_manifest(spec, 1e-10, 1e-9);

    detail::run_parallel(spec.grid.size(), n_threads, [&](size_t i) {
        ScanRow& row = res.rows[i];
        row.axis_value = spec.grid[i];
        row.used = spec.trunc;
        try {
            const ModelParams p = ScanSpec::apply_axis(spec.base, spec.axis, spec.grid[i]);
            const SteadyPoint pt = solve_steady_point(p, spec.trunc, spec.max_enlarge);
            row.g2_zero = pt.g2;
            row.n_cav = pt.n_cav;
            row.used = pt.used;
        } catch (const TruncationError&) {
            row.status = "truncation_fail";
        } catch (const std::exception& e) {
            row.status = std::string("solver_error: ") + e.what();
        }
    });
    return res;
}

inline std::string scan_csv(const ScanResult& res)
{
    std::ostringstream os;
    os << "axis_value,g2_zero,n_cav,delta_opt,truncation_nc,truncation_nt,status\n";
    char buf[256];
    for (const ScanRow& r : res.rows) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,", r.axis_value, r.g2_zero, r.n_cav);
        os << buf;
        if (r.delta_opt) {
            std::snprintf(buf, sizeof(buf), "%.12g", *r.delta_opt);
            os << buf;
        }
        os << ',' << r.used.n_c_max << ',' << r.used.n_t_max << ',' << r.status << '\n';
    }
    return os.str();
}

struct MinimizeResult {
    double delta_opt = 0.0;
    double g2_min = 0.0;
    double n_cav_at_min = 0.0;
    bool no_blockade = false; // flat landscape
};

// Minimum of g2(0) over a detuning window: 101-point coarse scan, then
// golden-section refinement of the bracketing interval down to 1e-3 gamma_c
// resolution in Delta.
inline MinimizeResult minimize_g2(const ModelParams& base, double delta_lo, double delta_hi,
                                  const Truncation& trunc = Truncation{}, int max_enlarge = 3,
                                  int n_threads = 1, int n_coarse = 101)
{
    if (!(delta_hi > delta_lo)) throw std::invalid_argument("minimize_g2: empty window");
    if (!base.pump_p) throw std::invalid_argument("minimize_g2: base drive unset");
    if (n_coarse < 3) throw std::invalid_argument("minimize_g2: need >= 3 coarse points");

    auto eval = [&](double d) -> SteadyPoint {
        ModelParams p = base;
        p.set_delta(d);
        return solve_steady_point(p, trunc, max_enlarge);
    };

    std::vector<double> grid(n_coarse);
    const double step = (delta_hi - delta_lo) / (n_coarse - 1);
    for (int i = 0; i < n_coarse; ++i) grid[i] = delta_lo + step * i;

    std::vector<double> g2s(n_coarse), ns(n_coarse);
    detail::run_parallel(grid.size(), n_threads, [&](size_t i) {
        const SteadyPoint pt = eval(grid[i]);
        g2s[i] = pt.g2;
        ns[i] = pt.n_cav;
    });

    int besti = 0;
    for (int i = 1; i < n_coarse; ++i)
        if (g2s[i] < g2s[besti]) besti = i;

    double gmin = g2s[besti], gmax = g2s[besti];
    for (double v : g2s) {
        gmin = std::min(gmin, v);
        gmax = std::max(gmax, v);
    }
    MinimizeResult res;
    if (gmax - gmin < 1e-6) {
        res.no_blockade = true;
        res.delta_opt = grid[besti];
        res.g2_min = g2s[besti];
        res.n_cav_at_min = ns[besti];
        return res;
    }

    double a = grid[std::max(besti - 1, 0)];
    double b = grid[std::min(besti + 1, n_coarse - 1)];
    const double tol = 1e-3 * std::max(base.gamma_c, 1e-300);
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = eval(x1).g2;
    double f2 = eval(x2).g2;
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1).g2;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2).g2;
        }
    }
    const double xopt = 0.5 * (a + b);
    const SteadyPoint pt = eval(xopt);
    // the refined point can only improve on the coarse winner
    if (pt.g2 <= g2s[besti]) {
        res.delta_opt = xopt;
        res.g2_min = pt.g2;
        res.n_cav_at_min = pt.n_cav;
    } else {
        res.delta_opt = grid[besti];
        res.g2_min = g2s[besti];
        res.n_cav_at_min = ns[besti];
    }
    return res;
}

// Named detuning windows of the two antibunching regimes.
struct DetuningWindow {
    double lo = 0.0;
    double hi = 0.0;
};

inline DetuningWindow unconventional_window(const ModelParams& p)
{
    return {-3.0 * p.gamma_c, 3.0 * p.gamma_c};
}

inline DetuningWindow conventional_window(const ModelParams& p)
{
    return {0.3 * p.omega_rabi, 0.7 * p.omega_rabi};
}

} // namespace trionpol

#endif
