#ifndef TRIONPOL_MANIFOLD_HPP
#define TRIONPOL_MANIFOLD_HPP

#include "trionpol/fock.hpp"
#include "trionpol/model.hpp"
#include "trionpol/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace trionpol {

// One fixed-total-excitation block of the coupled Hamiltonian, in the basis
// |N - n_t photons, n_t trions>, n_t = 0 .. min(N, n_s). Real symmetric
// tridiagonal.
struct ManifoldBlock {
    int n_total = 0;
    Eigen::VectorXd diag;    // (N - n_t) omega_cav + n_t omega_t
    Eigen::VectorXd offdiag; // (Omega/2) sqrt(N - n_t + 1) f(n_t), linking n_t-1 <-> n_t

    int dim() const { return static_cast<int>(diag.size()); }
};

inline ManifoldBlock build_manifold(int n_total, const ModelParams& params)
{
    if (n_total < 0) throw std::invalid_argument("build_manifold: n_total must be >= 0");
    params.validate();
    ManifoldBlock b;
    b.n_total = n_total;
    const int dim = std::min(n_total, params.n_s) + 1;
    b.diag.resize(dim);
    b.offdiag.resize(dim - 1);
    for (int nt = 0; nt < dim; ++nt)
        b.diag[nt] = (n_total - nt) * params.omega_cav + nt * params.omega_t;
    for (int nt = 1; nt < dim; ++nt)
        b.offdiag[nt - 1] = 0.5 * params.omega_rabi *
                            std::sqrt(static_cast<double>(n_total - nt + 1)) *
                            coupling_factor(nt, params.n_s);
    return b;
}

struct EigResult {
    Eigen::VectorXd evals;  // ascending
    Eigen::MatrixXd evecs;  // orthonormal columns
};

inline EigResult eig_block(const ManifoldBlock& block)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(block.diag, block.offdiag, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
        throw SolverError("eig_block: eigensolver failed to converge on manifold N=" +
                          std::to_string(block.n_total));
    return {es.eigenvalues(), es.eigenvectors()};
}

struct Peak {
    double omega = 0.0;
    double height = 0.0;
};

// Frequency-resolved emission spectrum, max-normalized.
struct SpectrumResult {
    Eigen::VectorXd omega_grid;
    Eigen::VectorXd intensity;
    std::vector<Peak> peaks;
    bool clipped = false;  // set when allowed grids do not cover every transition
};

enum class ClipPolicy { reject, allow };

// Strict local maxima with topographic prominence above prominence_rel of the
// global maximum; maxima closer than 2 grid steps collapse to the higher one.
inline std::vector<Peak> detect_peaks(const Eigen::VectorXd& grid, const Eigen::VectorXd& s,
                                      double prominence_rel = 0.01)
{
    if (prominence_rel <= 0.0 || prominence_rel > 1.0)
        throw std::invalid_argument("detect_peaks: prominence must be in (0, 1]");
    const Eigen::Index n = s.size();
    std::vector<Peak> out;
    if (n < 3) return out;
    const double smax = s.maxCoeff();
    if (!(smax > 0.0)) return out;

    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        if (!(s[i] > s[i - 1] && s[i] > s[i + 1])) continue;
        double base_l = s[i];
        for (Eigen::Index j = i; j >= 0 && s[j] <= s[i]; --j) base_l = std::min(base_l, s[j]);
        double base_r = s[i];
        for (Eigen::Index j = i; j < n && s[j] <= s[i]; ++j) base_r = std::min(base_r, s[j]);
        const double prom = s[i] - std::max(base_l, base_r);
        if (prom >= prominence_rel * smax) kept.push_back(i);
    }
    // merge near-coincident maxima
    std::vector<Eigen::Index> merged;
    for (Eigen::Index i : kept) {
        if (!merged.empty() && i - merged.back() < 2) {
            if (s[i] > s[merged.back()]) merged.back() = i;
        } else {
            merged.push_back(i);
        }
    }
    for (Eigen::Index i : merged) out.push_back({grid[i], s[i]});
    return out;
}

inline std::vector<double> peak_positions(const SpectrumResult& spec, double prominence = 0.01)
{
    std::vector<double> out;
    for (const Peak& p : detect_peaks(spec.omega_grid, spec.intensity, prominence))
        out.push_back(p.omega);
    return out;
}

// Caches the per-manifold eigenstructure and emission lines so that spectra
// for many pulse strengths (and several linewidths) reuse one diagonalization
// pass. Lines for manifold N are the N -> N-1 transitions weighted by the
// all-photon projection of the emitting eigenstate and the photon matrix
// element.
class SpectrumEngine {
public:
    explicit SpectrumEngine(ModelParams params) : params_(std::move(params))
    {
        params_.validate();
    }

    struct LineSet {
        std::vector<double> energy;
        std::vector<double> weight;
    };

    const ModelParams& params() const { return params_; }

    // Poisson tail cutoff: smallest n with cumulative mass >= 1 - eps.
    static int poisson_n_hi(double alpha_sq, double eps = 1e-8)
    {
        if (alpha_sq <= 0.0) return 0;
        double cum = std::exp(-alpha_sq);
        double p = cum;
        int n = 0;
        while (cum < 1.0 - eps && n < 100000) {
            ++n;
            p *= alpha_sq / n;
            cum += p;
        }
        return n;
    }

    static double poisson_pmf(int n, double alpha_sq)
    {
        if (alpha_sq <= 0.0) return n == 0 ? 1.0 : 0.0;
        return std::exp(-alpha_sq + n * std::log(alpha_sq) - std::lgamma(n + 1.0));
    }

    const EigResult& eig(int n_total)
    {
        if (n_total >= static_cast<int>(eigs_.size())) eigs_.resize(n_total + 1);
        if (!eigs_[n_total]) eigs_[n_total] = eig_block(build_manifold(n_total, params_));
        return *eigs_[n_total];
    }

    const LineSet& lines(int n_total)
    {
        if (n_total < 1) throw std::invalid_argument("lines: n_total must be >= 1");
        if (n_total >= static_cast<int>(lines_.size())) lines_.resize(n_total + 1);
        if (lines_[n_total]) return *lines_[n_total];

        const EigResult& up = eig(n_total);
        const EigResult& lo = eig(n_total - 1);
        const int dim_up = static_cast<int>(up.evals.size());
        const int dim_lo = static_cast<int>(lo.evals.size());
        const int k = std::min(dim_up, dim_lo); // photon emission preserves n_t

        Eigen::VectorXd fac(k);
        for (int nt = 0; nt < k; ++nt)
            fac[nt] = std::sqrt(static_cast<double>(n_total - nt));
        // <nu| c |mu> = sum_nt lo(nt, nu) sqrt(N - nt) up(nt, mu)
        const Eigen::MatrixXd cmat =
            lo.evecs.topRows(k).transpose() * fac.asDiagonal() * up.evecs.topRows(k);

        LineSet ls;
        ls.energy.reserve(static_cast<size_t>(dim_up) * dim_lo);
        ls.weight.reserve(static_cast<size_t>(dim_up) * dim_lo);
        for (int mu = 0; mu < dim_up; ++mu) {
            const double proj = up.evecs(0, mu) * up.evecs(0, mu); // |<mu|N,0>|^2
            for (int nu = 0; nu < dim_lo; ++nu) {
                const double w = proj * cmat(nu, mu) * cmat(nu, mu);
                if (w <= 0.0) continue;
                ls.energy.push_back(up.evals[mu] - lo.evals[nu]);
                ls.weight.push_back(w);
            }
        }
        lines_[n_total] = std::move(ls);
        return *lines_[n_total];
    }

    // [min, max] transition energy over manifolds 1..n_hi
    std::pair<double, double> line_span(int n_hi)
    {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int n = 1; n <= n_hi; ++n) {
            for (double e : lines(n).energy) {
                lo = std::min(lo, e);
                hi = std::max(hi, e);
            }
        }
        if (!(lo <= hi)) lo = hi = params_.omega_cav;
        return {lo, hi};
    }

    // S(omega) = sum_N p_N(|alpha|^2) sum_lines w * Lorentzian(omega - E_line),
    // unit-area Lorentzian of half width hwhm, max-normalized on the grid.
    SpectrumResult spectrum(double alpha_sq, const Eigen::VectorXd& grid,
                            std::optional<double> hwhm_override = std::nullopt,
                            ClipPolicy clip = ClipPolicy::reject)
    {
        if (alpha_sq < 0.0) throw std::invalid_argument("spectrum: alpha_sq must be >= 0");
        if (grid.size() < 2) throw std::invalid_argument("spectrum: grid needs >= 2 points");
        for (Eigen::Index i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1]))
                throw std::invalid_argument("spectrum: grid must be strictly increasing");

        const double hwhm = hwhm_override.value_or(0.5 * (params_.gamma_c + params_.gamma_t));
        if (!(hwhm > 0.0)) throw std::invalid_argument("spectrum: linewidth must be > 0");

        SpectrumResult res;
        res.omega_grid = grid;
        res.intensity = Eigen::VectorXd::Zero(grid.size());

        const int n_hi = poisson_n_hi(alpha_sq);
        if (n_hi < 1) return res;

        const auto [span_lo, span_hi] = line_span(n_hi);
        if (grid[0] > span_lo - 5.0 * hwhm || grid[grid.size() - 1] < span_hi + 5.0 * hwhm) {
            if (clip == ClipPolicy::reject)
                throw std::invalid_argument(
                    "spectrum: grid would clip the spectrum; required coverage [" +
                    std::to_string(span_lo - 5.0 * hwhm) + ", " +
                    std::to_string(span_hi + 5.0 * hwhm) + "]");
            res.clipped = true;
        }

        // Bin lines at grid resolution inside the grid, coarsely outside; the
        // Lorentzian sum then runs over occupied bins instead of raw lines.
        const Eigen::Index ng = grid.size();
        const double glo = grid[0];
        const double ghi = grid[ng - 1];
        const double step = (ghi - glo) / static_cast<double>(ng - 1);
        Eigen::VectorXd hist = Eigen::VectorXd::Zero(ng);
        std::map<long, double> far; // bin index -> weight, bin width 8*hwhm
        const double far_w = 8.0 * hwhm;

        for (int n = 1; n <= n_hi; ++n) {
            const double p = poisson_pmf(n, alpha_sq);
            if (p < 1e-18) continue;
            const LineSet& ls = lines(n);
            for (size_t i = 0; i < ls.energy.size(); ++i) {
                const double e = ls.energy[i];
                const double w = p * ls.weight[i];
                if (e >= glo && e <= ghi) {
                    const auto idx =
                        static_cast<Eigen::Index>(std::llround((e - glo) / step));
                    hist[std::min(idx, ng - 1)] += w;
                } else {
                    far[static_cast<long>(std::floor(e / far_w))] += w;
                }
            }
        }

        auto lorentz = [hwhm](double x) {
            return (hwhm / M_PI) / (x * x + hwhm * hwhm);
        };
        for (Eigen::Index j = 0; j < ng; ++j) {
            if (hist[j] == 0.0) continue;
            const double ej = glo + step * static_cast<double>(j);
            for (Eigen::Index i = 0; i < ng; ++i)
                res.intensity[i] += hist[j] * lorentz(grid[i] - ej);
        }
        for (const auto& [bin, w] : far) {
            const double ej = (static_cast<double>(bin) + 0.5) * far_w;
            for (Eigen::Index i = 0; i < ng; ++i)
                res.intensity[i] += w * lorentz(grid[i] - ej);
        }

        const double m = res.intensity.maxCoeff();
        if (m > 0.0) res.intensity /= m;
        res.peaks = detect_peaks(res.omega_grid, res.intensity);
        return res;
    }

private:
    ModelParams params_;
    std::vector<std::optional<EigResult>> eigs_;
    std::vector<std::optional<LineSet>> lines_;
};

// One-shot convenience wrapper; scans should hold a SpectrumEngine instead.
inline SpectrumResult transition_spectrum(double alpha_sq, const ModelParams& params,
                                          const Eigen::VectorXd& omega_grid,
                                          ClipPolicy clip = ClipPolicy::reject)
{
    SpectrumEngine engine(params);
    return engine.spectrum(alpha_sq, omega_grid, std::nullopt, clip);
}

// Peak count per pulse strength, for tracking the loss of the doublet.
struct PeakTrackRow {
    double alpha_sq = 0.0;
    std::vector<Peak> peaks;
};

inline std::vector<PeakTrackRow> track_peaks(SpectrumEngine& engine,
                                             const std::vector<double>& alpha_sq_grid,
                                             const Eigen::VectorXd& grid,
                                             std::optional<double> hwhm_override = std::nullopt,
                                             double prominence = 0.01)
{
    std::vector<PeakTrackRow> rows;
    rows.reserve(alpha_sq_grid.size());
    for (double a2 : alpha_sq_grid) {
        SpectrumResult s = engine.spectrum(a2, grid, hwhm_override, ClipPolicy::allow);
        PeakTrackRow row;
        row.alpha_sq = a2;
        row.peaks = detect_peaks(s.omega_grid, s.intensity, prominence);
        rows.push_back(std::move(row));
    }
    return rows;
}

// Smallest scanned alpha^2 from which the peak count stays at one (collapse of
// the split spectrum); nullopt when the doublet survives the whole scan.
inline std::optional<double> collapse_point(const std::vector<PeakTrackRow>& rows)
{
    std::optional<double> candidate;
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        if (it->peaks.size() <= 1)
            candidate = it->alpha_sq;
        else
            break;
    }
    return candidate;
}

} // namespace trionpol

#endif
