// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria marked with a runtime budget also fail when they
// exceed it.
#include "trionpol/config.hpp"
#include "trionpol/lindblad.hpp"
#include "trionpol/manifold.hpp"
#include "trionpol/materials.hpp"
#include "trionpol/sweep.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

using namespace trionpol;

namespace {

int g_threads = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what)
    {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

ModelParams gamma_units(int n_s, double g_c, double pump, double delta)
{
    ModelParams p = ModelParams::with_single_coupling(n_s, g_c);
    p.gamma_c = 1.0;
    p.gamma_t = 1.0;
    p.pump_p = pump;
    p.set_delta(delta);
    return p;
}

// ---- criterion 1: saturable-element limits ---------------------------------

Outcome c1_element_limits()
{
    Outcome out;
    // qubit limit: coupling elements equal (g_c/2) sqrt(N_C) bit-for-bit
    const double gc = 0.37;
    ModelParams p = ModelParams::with_single_coupling(1, gc);
    const Truncation tr{10, 1};
    const SparseOperator h = build_hamiltonian(p, tr);
    for (int n_c = 1; n_c <= 10; ++n_c) {
        const double got = h.mat.coeff(h.index(n_c, 0), h.index(n_c - 1, 1)).real();
        const double want = 0.5 * gc * std::sqrt(static_cast<double>(n_c));
        out.require(got == want, "qubit element N_C=" + std::to_string(n_c) + " not exact");
    }
    // bosonic limit at n_s = 10^6
    for (int nt = 1; nt <= 5; ++nt) {
        const double rel =
            std::abs(coupling_factor(nt, 1000000) / std::sqrt(static_cast<double>(nt)) - 1.0);
        out.require(rel < 1e-5, "bosonic element n_t=" + std::to_string(nt) + " off by " +
                                    fmt(rel));
    }
    return out;
}

// ---- criterion 2: vacuum Rabi doublet --------------------------------------

Outcome c2_rabi_doublet()
{
    Outcome out;
    for (int ns : {1, 10, 100}) {
        ModelParams p = ModelParams::with_rabi(ns, 1.0);
        p.gamma_c = p.gamma_t = 0.05;
        SpectrumEngine engine(p);
        const int npts = 801; // step = Omega/266 < Omega/200
        const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(npts, -1.5, 1.5);
        const double step = 3.0 / (npts - 1);
        const SpectrumResult s = engine.spectrum(1e-4, grid, std::nullopt, ClipPolicy::allow);
        const std::vector<Peak> peaks = detect_peaks(s.omega_grid, s.intensity);
        out.require(peaks.size() == 2,
                    "n_s=" + std::to_string(ns) + ": " + std::to_string(peaks.size()) +
                        " peaks instead of 2");
        if (peaks.size() == 2) {
            const double split = peaks[1].omega - peaks[0].omega;
            out.require(std::abs(split - 1.0) <= step,
                        "n_s=" + std::to_string(ns) + ": splitting " + fmt(split));
        }
    }
    return out;
}

// ---- criterion 3: collapse of the split spectrum ---------------------------

Outcome c3_collapse()
{
    Outcome out;
    const int ns = 100;
    ModelParams p = ModelParams::with_rabi(ns, 1.0);
    p.gamma_c = p.gamma_t = 0.05;
    SpectrumEngine engine(p);
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(3201, -1.6, 1.6);
    std::vector<double> alphas;
    for (double a = 5.0; a <= 250.0; a += 5.0) alphas.push_back(a);

    auto collapse_at = [&](double hwhm) {
        const auto rows = track_peaks(engine, alphas, grid, hwhm);
        return collapse_point(rows);
    };
    const auto c005 = collapse_at(0.05);
    const auto c002 = collapse_at(0.02);
    const auto c010 = collapse_at(0.10);
    out.require(c005.has_value(), "no collapse at gamma/Omega = 0.05");
    if (c005) {
        out.require(*c005 >= 0.5 * ns && *c005 <= 2.0 * ns,
                    "collapse at alpha^2 = " + fmt(*c005) + " outside [50, 200]");
        out.note("collapse(0.05) = " + fmt(*c005));
    }
    out.require(c002.has_value() && c010.has_value(), "missing collapse point");
    if (c002 && c010) {
        out.require(*c010 < *c002, "collapse(0.10) = " + fmt(*c010) +
                                       " not below collapse(0.02) = " + fmt(*c002));
        out.note("collapse(0.02) = " + fmt(*c002) + ", collapse(0.10) = " + fmt(*c010));
    }
    return out;
}

// ---- criterion 4: interference antibunching window -------------------------

Outcome c4_interference_window()
{
    Outcome out;
    const Truncation tr{6, 6};
    const MinimizeResult m12 =
        minimize_g2(gamma_units(100, 1.2, 0.5, 0.0), -3.0, 3.0, tr, 3, g_threads);
    out.require(m12.g2_min <= 0.2, "g2 min " + fmt(m12.g2_min) + " > 0.2");
    out.require(m12.n_cav_at_min >= 1e-4 && m12.n_cav_at_min <= 1e-2,
                "n_cav " + fmt(m12.n_cav_at_min) + " outside [1e-4, 1e-2]");
    const MinimizeResult m08 =
        minimize_g2(gamma_units(100, 0.8, 0.5, 0.0), -3.0, 3.0, tr, 3, g_threads);
    // the resonant landscape is reflection symmetric in the detuning, with twin
    // dips at +-|Delta_opt|; the physical dip position is the magnitude
    const double shift = std::abs(std::abs(m12.delta_opt) - std::abs(m08.delta_opt));
    out.require(shift < 0.5, "dip moved by " + fmt(shift) + " gamma between g_c 0.8 and 1.2");
    out.note("g2_min = " + fmt(m12.g2_min) + " at |Delta| = " + fmt(std::abs(m12.delta_opt)) +
             ", n_cav = " + fmt(m12.n_cav_at_min));
    return out;
}

// ---- criterion 5: polariton-resonant antibunching --------------------------

Outcome c5_polariton_window()
{
    Outcome out;
    const ModelParams p = gamma_units(100, 120.0, 0.5, 0.0); // Omega = 1200
    const Truncation tr{7, 7};
    const MinimizeResult m = minimize_g2(p, 360.0, 840.0, tr, 3, g_threads);
    out.require(std::abs(m.delta_opt - 600.0) <= 60.0,
                "dip at Delta = " + fmt(m.delta_opt) + ", expected 600 +- 60");
    out.require(m.n_cav_at_min >= 0.01 && m.n_cav_at_min <= 0.5,
                "n_cav " + fmt(m.n_cav_at_min) + " outside [0.01, 0.5]");

    // depth from the coarse landscape, asymmetry probed 20 gamma off the dip
    auto g2_at = [&](double d) {
        ModelParams q = p;
        q.set_delta(d);
        return solve_steady_point(q, tr).g2;
    };
    double gmax = m.g2_min;
    for (int i = 0; i <= 24; ++i) gmax = std::max(gmax, g2_at(360.0 + 20.0 * i));
    const double depth = gmax - m.g2_min;
    const double asym = std::abs(g2_at(m.delta_opt + 20.0) - g2_at(m.delta_opt - 20.0));
    out.require(asym > 0.1 * depth,
                "asymmetry " + fmt(asym) + " <= 10% of depth " + fmt(depth));
    out.note("g2_min = " + fmt(m.g2_min) + " at Delta = " + fmt(m.delta_opt) +
             ", n_cav = " + fmt(m.n_cav_at_min) + ", asym/depth = " + fmt(asym / depth));
    return out;
}

// ---- criterion 6: delayed-coherence structure ------------------------------

// tau positions of strict local maxima
std::vector<double> local_maxima(const std::vector<double>& tau, const std::vector<double>& y)
{
    std::vector<double> out;
    for (size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] > y[i - 1] && y[i] > y[i + 1]) out.push_back(tau[i]);
    return out;
}

Outcome c6_delayed_coherence()
{
    Outcome out;
    auto revival_period = [&](int ns) {
        const ModelParams base = gamma_units(ns, 1.2, 0.5, 0.0);
        const Truncation tr{6, 6};
        const MinimizeResult m = minimize_g2(base, 0.0, 3.0, tr, 3, g_threads);
        ModelParams p = base;
        p.set_delta(m.delta_opt);
        const SteadyPoint pt = solve_steady_point(p, tr);
        const Liouvillian l = make_liouvillian(p, pt.used);
        const SparseOperator c = photon_lowering(pt.used, p.n_s);
        std::vector<double> taus(500);
        for (int i = 0; i < 500; ++i) taus[i] = 5.0 * (i + 1) / 500.0;
        const G2Result res = g2_tau(l, pt.rho, c, taus);
        const std::vector<double> maxima = local_maxima(res.tau_grid, res.g2_tau);
        if (maxima.size() < 2) return -1.0;
        return maxima[1] - maxima[0];
    };
    const double t25 = revival_period(25);
    const double t100 = revival_period(100);
    out.require(t25 > 0.0 && t100 > 0.0, "oscillation maxima not found");
    if (t25 > 0.0 && t100 > 0.0) {
        const double ratio = t25 / t100;
        out.require(std::abs(ratio - 2.0) <= 0.2,
                    "period ratio " + fmt(ratio) + " not 2 +- 10%");
        out.note("periods " + fmt(t25) + " / " + fmt(t100) + " = " + fmt(ratio));
    }

    // strong-coupling case: monotone rise, no oscillation above 1%
    {
        const ModelParams base = gamma_units(100, 120.0, 0.5, 0.0);
        const Truncation tr{7, 7};
        const MinimizeResult m = minimize_g2(base, 360.0, 840.0, tr, 3, g_threads);
        ModelParams p = base;
        p.set_delta(m.delta_opt);
        const SteadyPoint pt = solve_steady_point(p, tr);
        const Liouvillian l = make_liouvillian(p, pt.used);
        const SparseOperator c = photon_lowering(pt.used, p.n_s);
        std::vector<double> taus(200);
        for (int i = 0; i < 200; ++i) taus[i] = 2.0 * (i + 1) / 200.0;
        const G2Result res = g2_tau(l, pt.rho, c, taus);
        const double range = res.g2_tau.back() - res.g2_zero;
        double down = 0.0;
        double prev = res.g2_zero;
        for (double v : res.g2_tau) {
            down = std::max(down, prev - v);
            prev = std::max(prev, v);
        }
        out.require(range > 0.0, "g2(tau) does not rise");
        out.require(down <= 0.01 * std::abs(range),
                    "oscillation amplitude " + fmt(down) + " above 1% of rise " + fmt(range));
        out.note("monotone rise " + fmt(res.g2_zero) + " -> " + fmt(res.g2_tau.back()));
    }
    return out;
}

// ---- criterion 7: materials pipeline ----------------------------------------

Outcome c7_materials()
{
    Outcome out;
    const double chi = chi_t(0.87, 2.54);
    out.require(std::abs(chi - 7.35) <= 0.01, "chi_T = " + fmt(chi));

    MaterialParams mp;
    mp.lambda1_nm = 0.87;
    mp.lambda2_nm = 2.54;
    mp.xi = 1.0;
    mp.epsilon = 1.0;
    mp.m_e = 0.8;
    mp.m_h = 0.84;
    mp.l_cav_um = 1.0;
    mp.area_um2 = 1.0;
    mp.density_per_cm2 = 1e10;
    const double g0_val = g0(mp);
    out.require(std::abs(g0_val / 0.058 - 1.0) <= 0.02, "g0 = " + fmt(g0_val) + " meV");

    mp.xi = 0.6;
    const ModelParams p = derive_model_params(mp, 0.05, 0.26);
    out.require(std::abs(p.g_c() / 0.256 - 1.0) <= 0.02, "g_c = " + fmt(p.g_c()) + " meV");
    out.require(p.n_s == 100, "N_s = " + std::to_string(p.n_s));
    out.note("g0 = " + fmt(g0_val) + ", chi_T = " + fmt(chi) + ", g_c = " + fmt(p.g_c()) +
             ", N_s = 100");
    return out;
}

// ---- criterion 8: MoSe2 end-to-end ------------------------------------------

Outcome c8_mose2()
{
    Outcome out;
    MaterialParams mp;
    mp.lambda1_nm = 0.87;
    mp.lambda2_nm = 2.54;
    mp.xi = 0.6;
    mp.epsilon = 1.0;
    mp.m_e = 0.8;
    mp.m_h = 0.84;
    mp.l_cav_um = 1.0;
    mp.area_um2 = 1.0;
    mp.density_per_cm2 = 1e10;

    // baseline device: scan the unspecified pump over [0.1, 1] gamma_c
    {
        ModelParams base = derive_model_params(mp, 0.05, 0.26);
        const Truncation tr{5, 5};
        bool found = false;
        double best_g2 = 1e9, best_n = 0.0, best_p = 0.0;
        for (int k = 1; k <= 10; ++k) {
            ModelParams p = base;
            p.pump_p = 0.1 * k * p.gamma_c;
            p.set_delta(0.0);
            const MinimizeResult m =
                minimize_g2(p, -0.75, 0.75, tr, 3, g_threads); // window inside the polaritons
            if (m.g2_min < best_g2) {
                best_g2 = m.g2_min;
                best_n = m.n_cav_at_min;
                best_p = *p.pump_p;
            }
            if (m.g2_min <= 0.15 && m.n_cav_at_min >= 1.3e-5 && m.n_cav_at_min <= 1.3e-3) {
                found = true;
                out.note("P = " + fmt(*p.pump_p) + " meV: g2 = " + fmt(m.g2_min) +
                         ", n_cav = " + fmt(m.n_cav_at_min));
                break;
            }
        }
        out.require(found, "no pump in [0.1, 1] gamma_c meets g2 <= 0.15 with n_cav within "
                           "10x of 1.3e-4 (best g2 = " +
                               fmt(best_g2) + ", n = " + fmt(best_n) + " at P = " +
                               fmt(best_p) + ")");
    }

    // improved device: antinode placement, narrow lines, polariton-resonant window
    {
        MaterialParams mp2 = mp;
        mp2.xi = 1.0;
        ModelParams base = derive_model_params(mp2, 0.01, 0.01);
        out.require(std::abs(base.g_c() / 0.426 - 1.0) <= 0.02,
                    "improved g_c = " + fmt(base.g_c()));
        base.pump_p = 0.5 * base.gamma_c;
        base.set_delta(0.0);
        const Truncation tr{7, 7};
        const DetuningWindow w = conventional_window(base);
        const MinimizeResult m = minimize_g2(base, w.lo, w.hi, tr, 3, g_threads);
        out.require(m.g2_min <= 0.15, "improved-case g2 = " + fmt(m.g2_min) + " > 0.15");
        out.note("improved g2 = " + fmt(m.g2_min) + " at Delta = " + fmt(m.delta_opt) + " meV");
    }
    return out;
}

// ---- criterion 9: solver property suite -------------------------------------

Outcome c9_properties()
{
    Outcome out;
    // trace preservation on random Hermitian inputs
    {
        const Liouvillian l = make_liouvillian(gamma_units(5, 1.2, 0.5, 0.1), Truncation{4, 4});
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            Eigen::MatrixXcd m(l.dim_rho, l.dim_rho);
            for (int i = 0; i < l.dim_rho; ++i)
                for (int j = 0; j < l.dim_rho; ++j) m(i, j) = cxd(u(rng), u(rng));
            m = ((m + m.adjoint()) / 2.0).eval();
            m /= m.norm();
            worst = std::max(worst, std::abs(l.apply(m).trace()));
        }
        out.require(worst <= 1e-10, "trace residual " + fmt(worst));
    }
    // steady-state contract and the analytic linear-cavity oracle
    {
        ModelParams p = gamma_units(1, 0.0, 0.3, 0.5);
        const Truncation tr{8, 0};
        const Liouvillian l = make_liouvillian(p, tr);
        const DensityMatrix rho = steady_state(l);
        out.require(rho.hermiticity_error() <= 1e-10, "rho not Hermitian");
        out.require(std::abs(rho.trace() - 1.0) <= 1e-10, "trace(rho) != 1");
        out.require(rho.min_eigenvalue() >= -1e-8, "rho not positive");
        const SparseOperator c = photon_lowering(tr, 1);
        const double n = trace_prod(SpMat(SpMat(c.mat.adjoint()) * c.mat), rho.mat).real();
        const double want = 0.3 * 0.3 / (0.5 * 0.5 + 0.25);
        out.require(std::abs(n - want) <= 1e-8, "driven-cavity n = " + fmt(n));
        out.require(std::abs(g2_zero(rho, c) - 1.0) <= 1e-6, "linear g2 != 1");
    }
    // long-delay decorrelation
    {
        ModelParams p = gamma_units(10, 1.2, 0.5, 0.3);
        const SteadyPoint pt = solve_steady_point(p, Truncation{6, 6});
        const Liouvillian l = make_liouvillian(p, pt.used);
        const SparseOperator c = photon_lowering(pt.used, p.n_s);
        const G2Result res = g2_tau(l, pt.rho, c, {30.0});
        out.require(std::abs(res.g2_tau.back() - 1.0) <= 0.02,
                    "g2(30/gamma) = " + fmt(res.g2_tau.back()));
    }
    // deterministic re-runs
    {
        ScanSpec spec;
        spec.base = gamma_units(10, 1.2, 0.5, 0.0);
        spec.trunc = Truncation{5, 5};
        spec.axis = ScanAxis::delta;
        for (int i = 0; i < 11; ++i) spec.grid.push_back(-1.0 + 0.2 * i);
        const std::string a = scan_csv(run_scan(spec, g_threads));
        const std::string b = scan_csv(run_scan(spec, 1));
        out.require(a == b, "scan CSV not byte-identical across re-runs");
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    if (argc > 1) g_threads = std::max(1, std::atoi(argv[1]));

    struct Criterion {
        int id;
        const char* name;
        double budget_s; // 0 = no budget
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "saturable-element limits (qubit exact, bosonic 1e-5)", 1.0, c1_element_limits},
        {2, "vacuum Rabi doublet split by Omega", 1.0, c2_rabi_doublet},
        {3, "split-spectrum collapse near N_s, linewidth ordering", 30.0, c3_collapse},
        {4, "interference antibunching window near zero detuning", 120.0,
         c4_interference_window},
        {5, "polariton-resonant antibunching, asymmetric profile", 120.0, c5_polariton_window},
        {6, "delayed-coherence oscillation scaling and monotone strong-coupling rise", 300.0,
         c6_delayed_coherence},
        {7, "materials pipeline point values", 1.0, c7_materials},
        {8, "MoSe2 end-to-end antibunching estimates", 0.0, c8_mose2},
        {9, "solver property suite", 0.0, c9_properties},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0 && elapsed > c.budget_s) {
            out.pass = false;
            out.note("runtime " + fmt(elapsed) + " s over budget " + fmt(c.budget_s) + " s");
        }
        std::printf("[%s] %d: %s (%.2f s)%s%s\n", out.pass ? "PASS" : "FAIL", c.id, c.name,
                    elapsed, out.detail.empty() ? "" : " -- ", out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
