#ifndef TRIONPOL_LINDBLAD_HPP
#define TRIONPOL_LINDBLAD_HPP

#include "trionpol/fock.hpp"
#include "trionpol/model.hpp"
#include "trionpol/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trionpol {

// Hermitian, unit-trace state over the truncated space.
struct DensityMatrix {
    Eigen::MatrixXcd mat;

    Eigen::Index dim() const { return mat.rows(); }
    double trace() const { return mat.trace().real(); }

    double hermiticity_error() const
    {
        return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
    }

    double min_eigenvalue() const
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
};

// Lindblad generator, vectorized column-major: d(vec rho)/dt = superop * vec rho.
struct Liouvillian {
    SpMat superop;
    int dim_rho = 0;
    // provenance snapshot when built from model parameters
    std::optional<ModelParams> params;
    std::optional<Truncation> trunc;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& vec_rho) const { return superop * vec_rho; }

    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const
    {
        Eigen::VectorXcd v = superop * Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
        return Eigen::Map<Eigen::MatrixXcd>(v.data(), dim_rho, dim_rho);
    }
};

// L(rho) = -i[H, rho] + sum_k (C_k rho C_k^dag - {C_k^dag C_k, rho}/2)
inline Liouvillian build_liouvillian(const SparseOperator& h,
                                     std::span<const SparseOperator> collapses)
{
    const Eigen::Index d = h.dim();
    if (!is_hermitian(h.mat))
        throw std::invalid_argument("build_liouvillian: Hamiltonian is not Hermitian");
    for (const SparseOperator& c : collapses)
        if (c.dim() != d)
            throw std::invalid_argument("build_liouvillian: collapse operator dimension mismatch");

    SpMat eye(d, d);
    eye.setIdentity();
    const cxd mi(0.0, -1.0);

    SpMat l = mi * (kron(eye, h.mat) - kron(SpMat(h.mat.transpose()), eye));
    for (const SparseOperator& c : collapses) {
        const SpMat cdc = SpMat(c.mat.adjoint()) * c.mat;
        l += kron(SpMat(c.mat.conjugate()), c.mat);
        l -= 0.5 * kron(eye, cdc);
        l -= 0.5 * kron(SpMat(cdc.transpose()), eye);
    }
    l.makeCompressed();

    Liouvillian out;
    out.superop = std::move(l);
    out.dim_rho = static_cast<int>(d);
    return out;
}

// Rotating-frame Liouvillian of the driven cavity-trion system with collapse
// operators sqrt(gamma_c) c and sqrt(gamma_t) B.
inline Liouvillian make_liouvillian(const ModelParams& params, const Truncation& trunc)
{
    const SparseOperator h = build_hamiltonian(params, trunc, Frame::rotating);
    SparseOperator cc = photon_lowering(trunc, params.n_s);
    SparseOperator cb = trion_lowering(trunc, params.n_s);
    cc.mat *= std::sqrt(params.gamma_c);
    cb.mat *= std::sqrt(params.gamma_t);
    std::vector<SparseOperator> collapses;
    collapses.push_back(std::move(cc));
    collapses.push_back(std::move(cb));
    Liouvillian l = build_liouvillian(h, collapses);
    l.params = params;
    l.trunc = trunc;
    return l;
}

inline double superop_inf_norm(const SpMat& l)
{
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(l.rows());
    for (int k = 0; k < l.outerSize(); ++k)
        for (SpMat::InnerIterator it(l, k); it; ++it)
            rowsum[it.row()] += std::abs(it.value());
    return rowsum.size() ? rowsum.maxCoeff() : 0.0;
}

// Unique driven-dissipative steady state, solved by sparse LU with the first
// row of L replaced by the trace constraint, plus one step of iterative
// refinement. The result is symmetrized and renormalized before the residual
// check.
inline DensityMatrix steady_state(const Liouvillian& l, double tol = 1e-10)
{
    const int d = l.dim_rho;
    const Eigen::Index n = l.superop.rows();

    std::vector<Triplet> t;
    t.reserve(static_cast<size_t>(l.superop.nonZeros()) + d);
    for (int k = 0; k < l.superop.outerSize(); ++k)
        for (SpMat::InnerIterator it(l.superop, k); it; ++it)
            if (it.row() != 0) t.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < d; ++i) t.emplace_back(0, i + static_cast<Eigen::Index>(i) * d, 1.0);
    SpMat a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();

    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
        throw SolverError("steady_state: sparse factorization failed (singular system?)");

    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
    b[0] = 1.0;
    Eigen::VectorXcd x = lu.solve(b);
    x += lu.solve(Eigen::VectorXcd(b - a * x)); // one refinement pass

    DensityMatrix rho;
    rho.mat = Eigen::Map<Eigen::MatrixXcd>(x.data(), d, d);
    rho.mat = 0.5 * (rho.mat + rho.mat.adjoint()).eval();
    const double tr = rho.mat.trace().real();
    if (!(std::abs(tr) > 1e-300))
        throw SolverError("steady_state: zero-trace solution");
    rho.mat /= tr;

    const Eigen::VectorXcd resid =
        l.superop * Eigen::Map<const Eigen::VectorXcd>(rho.mat.data(), n);
    const double rnorm = resid.norm();
    const double guard = std::max(tol, 1e3 * std::numeric_limits<double>::epsilon() *
                                           superop_inf_norm(l.superop));
    if (!(rnorm <= guard))
        throw SolverError("steady_state: residual " + std::to_string(rnorm) +
                          " exceeds tolerance (non-unique steady state or broken truncation)");
    return rho;
}

// Tr[c^dag c^dag c c rho] / Tr[c^dag c rho]^2
inline double g2_zero(const DensityMatrix& rho, const SparseOperator& c)
{
    const SpMat cd = c.mat.adjoint();
    const SpMat num_op = SpMat(cd * cd * c.mat * c.mat);
    const SpMat n_op = SpMat(cd * c.mat);
    const double n = trace_prod(n_op, rho.mat).real();
    if (n < 1e-14)
        throw SolverError("g2_zero: n_cav < 1e-14, photon statistics unmeasurable");
    return trace_prod(num_op, rho.mat).real() / (n * n);
}

namespace detail {

// Dormand-Prince 5(4) on d(vec X)/dt = L vec X with error-per-unit-time
// control: the per-step error budget is tol * rate_scale * h * norm_scale.
inline void propagate_vec(const Liouvillian& l, Eigen::VectorXcd& y, double t_from, double t_to,
                          double tol, double rate_scale, double norm_scale)
{
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    if (t_to <= t_from) return;
    const double lnorm = std::max(superop_inf_norm(l.superop), 1e-300);
    double h = std::min(0.1 / lnorm, t_to - t_from);
    const double h_min = (t_to - t_from) * 1e-14;
    double t = t_from;

    Eigen::VectorXcd k1 = l.superop * y;
    while (t < t_to) {
        h = std::min(h, t_to - t);
        const Eigen::VectorXcd k2 = l.superop * Eigen::VectorXcd(y + h * (a21 * k1));
        const Eigen::VectorXcd k3 = l.superop * Eigen::VectorXcd(y + h * (a31 * k1 + a32 * k2));
        const Eigen::VectorXcd k4 =
            l.superop * Eigen::VectorXcd(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Eigen::VectorXcd k5 =
            l.superop * Eigen::VectorXcd(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Eigen::VectorXcd k6 = l.superop * Eigen::VectorXcd(y + h * (a61 * k1 + a62 * k2 +
                                                                          a63 * k3 + a64 * k4 +
                                                                          a65 * k5));
        const Eigen::VectorXcd y5 =
            y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Eigen::VectorXcd k7 = l.superop * y5;
        const double err =
            (h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)).norm();

        const double budget = tol * rate_scale * h * norm_scale;
        if (err <= budget) {
            t += h;
            y = y5;
            k1 = k7; // FSAL
        }
        const double ratio = budget / std::max(err, 1e-300);
        h *= std::clamp(0.9 * std::pow(ratio, 0.2), 0.2, 5.0);
        if (h < h_min)
            throw SolverError(
                "propagate: step size underflow (stiff system; |L| scale ~ " +
                std::to_string(lnorm) + ")");
    }
}

} // namespace detail

// Evolve a (not necessarily Hermitian) operator X under L for a time span.
inline Eigen::MatrixXcd propagate(const Liouvillian& l, const Eigen::MatrixXcd& x0, double t,
                                  double tol = 1e-9)
{
    if (x0.rows() != l.dim_rho || x0.cols() != l.dim_rho)
        throw std::invalid_argument("propagate: dimension mismatch");
    const double rate = l.params ? std::max(l.params->gamma_c, 1e-300) : 1.0;
    const double scale = std::max(x0.norm(), 1e-300);
    Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(x0.data(), x0.size());
    detail::propagate_vec(l, y, 0.0, t, tol, rate, scale);
    return Eigen::Map<Eigen::MatrixXcd>(y.data(), l.dim_rho, l.dim_rho);
}

struct G2Result {
    double g2_zero = 0.0;
    double n_cav = 0.0;
    std::vector<double> tau_grid;
    std::vector<double> g2_tau;
};

// Quantum regression: X(0) = c rho_ss c^dag evolves under the same L;
// g2(tau) = Tr[c^dag c X(tau)] / n_cav^2.
inline G2Result g2_tau(const Liouvillian& l, const DensityMatrix& rho_ss,
                       const SparseOperator& c, const std::vector<double>& tau_grid,
                       double tol = 1e-9)
{
    if (rho_ss.dim() != l.dim_rho)
        throw std::invalid_argument("g2_tau: dimension mismatch");
    for (size_t i = 0; i < tau_grid.size(); ++i)
        if (tau_grid[i] < 0.0 || (i > 0 && tau_grid[i] <= tau_grid[i - 1]))
            throw std::invalid_argument("g2_tau: tau grid must be increasing and >= 0");

    const SpMat n_op = SpMat(SpMat(c.mat.adjoint()) * c.mat);
    const double n = trace_prod(n_op, rho_ss.mat).real();
    if (n < 1e-14)
        throw SolverError("g2_tau: n_cav < 1e-14, photon statistics unmeasurable");

    const Eigen::MatrixXcd x0 = c.mat * rho_ss.mat * c.mat.adjoint();
    const double rate = l.params ? std::max(l.params->gamma_c, 1e-300) : 1.0;
    const double scale = std::max(x0.norm(), 1e-300);

    G2Result res;
    res.n_cav = n;
    res.g2_zero = trace_prod(n_op, x0).real() / (n * n);
    res.tau_grid = tau_grid;
    res.g2_tau.reserve(tau_grid.size());

    Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(x0.data(), x0.size());
    double t = 0.0;
    for (double tau : tau_grid) {
        detail::propagate_vec(l, y, t, tau, tol, rate, scale);
        t = tau;
        const Eigen::MatrixXcd x = Eigen::Map<Eigen::MatrixXcd>(y.data(), l.dim_rho, l.dim_rho);
        res.g2_tau.push_back(trace_prod(n_op, x).real() / (n * n));
    }
    return res;
}

struct TruncationDiagnostic {
    bool pass = false;
    double pop_top_nc = 0.0;
    double pop_top_nt = 0.0;
    std::optional<Truncation> recommended; // set on FAIL

    std::string status() const { return pass ? "PASS" : "FAIL"; }
};

// Population stranded on the truncation edges. The photon edge is always a
// cutoff; the trion edge only counts as one when n_t_max < n_s, since at the
// Pauli ceiling the ladder ends physically (the qubit limit must PASS even
// with a populated upper state).
inline TruncationDiagnostic truncation_check(const DensityMatrix& rho, const Truncation& trunc,
                                             int n_s, double threshold = 1e-8)
{
    const int ntd = trunc.n_t_dim(n_s);
    const int ncd = trunc.n_c_dim();
    if (rho.dim() != static_cast<Eigen::Index>(ntd) * ncd)
        throw std::invalid_argument("truncation_check: dimension mismatch");

    TruncationDiagnostic diag;
    for (int nt = 0; nt < ntd; ++nt)
        diag.pop_top_nc += rho.mat(trunc.n_c_max * ntd + nt, trunc.n_c_max * ntd + nt).real();
    for (int nc = 0; nc < ncd; ++nc)
        diag.pop_top_nt += rho.mat(nc * ntd + ntd - 1, nc * ntd + ntd - 1).real();

    const bool nt_is_cutoff = trunc.n_t_max < n_s;
    const bool nc_ok = diag.pop_top_nc < threshold;
    const bool nt_ok = !nt_is_cutoff || diag.pop_top_nt < threshold;
    diag.pass = nc_ok && nt_ok;
    if (!diag.pass) {
        Truncation rec = trunc;
        if (!nc_ok) rec.n_c_max += 4;
        if (!nt_ok) rec.n_t_max += 4;
        diag.recommended = rec;
    }
    return diag;
}

struct SteadyPoint {
    DensityMatrix rho;
    double n_cav = 0.0;
    double g2 = 0.0;
    Truncation used;
};

// One steady-state solve with truncation auto-enlargement (+4 on the failing
// edge, up to max_enlarge rounds).
inline SteadyPoint solve_steady_point(const ModelParams& params, Truncation trunc,
                                      int max_enlarge = 3)
{
    for (int attempt = 0;; ++attempt) {
        const Liouvillian l = make_liouvillian(params, trunc);
        SteadyPoint pt;
        pt.rho = steady_state(l);
        pt.used = trunc;
        const SparseOperator c = photon_lowering(trunc, params.n_s);
        const SpMat n_op = SpMat(SpMat(c.mat.adjoint()) * c.mat);
        pt.n_cav = trace_prod(n_op, pt.rho.mat).real();
        pt.g2 = g2_zero(pt.rho, c);
        const TruncationDiagnostic diag = truncation_check(pt.rho, trunc, params.n_s);
        if (diag.pass) return pt;
        if (attempt >= max_enlarge)
            throw TruncationError("solve_steady_point: truncation check still failing at (" +
                                  std::to_string(trunc.n_c_max) + ", " +
                                  std::to_string(trunc.n_t_max) + ")");
        trunc = *diag.recommended;
    }
}

// CSV-ready one-line summary of a steady-state solve.
inline std::string steady_summary_line(const ModelParams& params, double n_cav, double g2)
{
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%d,%.12g,%.12g,%.12g,%.12g,%.12g",
                  params.delta().value_or(0.0), params.g_c(), params.n_s,
                  params.pump_p.value_or(0.0), params.gamma_c, params.gamma_t, n_cav, g2);
    return buf;
}

} // namespace trionpol

#endif
