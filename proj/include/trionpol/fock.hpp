#ifndef TRIONPOL_FOCK_HPP
#define TRIONPOL_FOCK_HPP

#include "trionpol/model.hpp"
#include "trionpol/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

namespace trionpol {

// Sparse operator over the product basis |n_c, n_t>, photon-major:
// index(n_c, n_t) = n_c * n_t_dim + n_t.
struct SparseOperator {
    SpMat mat;
    int n_c_max = 0;
    int n_t_dim = 1;

    Eigen::Index dim() const { return mat.rows(); }
    int index(int n_c, int n_t) const { return n_c * n_t_dim + n_t; }
};

// Matrix element of the deformed trion lowering operator,
// <n_t - 1| B |n_t> for n_s available electrons. Vanishes at n_t = 0 and
// beyond the Pauli ceiling n_t > n_s. The alternating correction is
// 1/binomial(n_s, n_t), evaluated multiplicatively over min(n_t, n_s - n_t)
// factors so it neither overflows nor loses the short products near
// n_t ~ n_s. Once the binomial exceeds 1e30 the correction is exactly 0.
inline double coupling_factor(int n_t, int n_s)
{
    if (n_t < 0) throw std::invalid_argument("coupling_factor: n_t must be >= 0");
    if (n_s < 1) throw std::invalid_argument("coupling_factor: n_s must be >= 1");
    if (n_t == 0 || n_t > n_s) return 0.0;

    const double ns = n_s;
    const double nt = n_t;
    const double root = std::sqrt(nt * (1.0 - nt / (ns + 1.0)) * ns / (ns + 1.0));

    const int m = std::min(n_t, n_s - n_t);
    double binom = 1.0;
    for (int k = 1; k <= m; ++k) {
        binom *= static_cast<double>(n_s - m + k) / static_cast<double>(k);
        if (binom > 1e30) {
            binom = std::numeric_limits<double>::infinity();
            break;
        }
    }
    const double sign = (n_t % 2 == 0) ? 1.0 : -1.0;
    const double bracket = 1.0 - sign / binom;
    return root * bracket;
}

namespace detail {

inline SparseOperator from_triplets(const Truncation& trunc, int n_s,
                                    std::vector<Triplet>&& triplets)
{
    SparseOperator op;
    op.n_c_max = trunc.n_c_max;
    op.n_t_dim = trunc.n_t_dim(n_s);
    op.mat = SpMat(trunc.dim(n_s), trunc.dim(n_s));
    op.mat.setFromTriplets(triplets.begin(), triplets.end());
    op.mat.makeCompressed();
    return op;
}

} // namespace detail

// Bosonic photon lowering operator c: <n_c - 1, n_t| c |n_c, n_t> = sqrt(n_c).
inline SparseOperator photon_lowering(const Truncation& trunc, int n_s)
{
    trunc.validate();
    const int ntd = trunc.n_t_dim(n_s);
    std::vector<Triplet> t;
    for (int nc = 1; nc <= trunc.n_c_max; ++nc)
        for (int nt = 0; nt < ntd; ++nt)
            t.emplace_back((nc - 1) * ntd + nt, nc * ntd + nt, std::sqrt(static_cast<double>(nc)));
    return detail::from_triplets(trunc, n_s, std::move(t));
}

// Deformed trion lowering operator B with coupling_factor matrix elements.
inline SparseOperator trion_lowering(const Truncation& trunc, int n_s)
{
    trunc.validate();
    if (n_s < 1) throw std::invalid_argument("trion_lowering: n_s must be >= 1");
    const int ntd = trunc.n_t_dim(n_s);
    std::vector<Triplet> t;
    for (int nc = 0; nc <= trunc.n_c_max; ++nc)
        for (int nt = 1; nt < ntd; ++nt)
            t.emplace_back(nc * ntd + nt - 1, nc * ntd + nt, coupling_factor(nt, n_s));
    return detail::from_triplets(trunc, n_s, std::move(t));
}

// Diagonal photon number operator c^dag c.
inline SparseOperator photon_number(const Truncation& trunc, int n_s)
{
    const int ntd = trunc.n_t_dim(n_s);
    std::vector<Triplet> t;
    for (int nc = 0; nc <= trunc.n_c_max; ++nc)
        for (int nt = 0; nt < ntd; ++nt)
            if (nc > 0) t.emplace_back(nc * ntd + nt, nc * ntd + nt, static_cast<double>(nc));
    return detail::from_triplets(trunc, n_s, std::move(t));
}

// Diagonal trion excitation number operator (bare n_t, not B^dag B).
inline SparseOperator trion_number(const Truncation& trunc, int n_s)
{
    const int ntd = trunc.n_t_dim(n_s);
    std::vector<Triplet> t;
    for (int nc = 0; nc <= trunc.n_c_max; ++nc)
        for (int nt = 1; nt < ntd; ++nt)
            t.emplace_back(nc * ntd + nt, nc * ntd + nt, static_cast<double>(nt));
    return detail::from_triplets(trunc, n_s, std::move(t));
}

enum class Frame { lab, rotating };

// System Hamiltonian on the truncated space.
//   lab:      H = omega_cav c^dag c + omega_t N_t + (Omega/2)(B^dag c + B c^dag)
//   rotating: frame of the drive; omega_cav -> Delta, omega_t -> omega_t - omega_p,
//             plus the drive term P (c + c^dag). Requires pump_p and omega_p.
inline SparseOperator build_hamiltonian(const ModelParams& params, const Truncation& trunc,
                                        Frame frame = Frame::lab)
{
    params.validate();
    trunc.validate();
    const SparseOperator c = photon_lowering(trunc, params.n_s);
    const SparseOperator b = trion_lowering(trunc, params.n_s);
    const SparseOperator nc = photon_number(trunc, params.n_s);
    const SparseOperator nt = trion_number(trunc, params.n_s);

    double e_cav = params.omega_cav;
    double e_t = params.omega_t;
    SpMat h;
    const SpMat coupl = SpMat(0.5 * params.omega_rabi *
                              (SpMat(b.mat.adjoint()) * c.mat + b.mat * SpMat(c.mat.adjoint())));
    if (frame == Frame::rotating) {
        if (!params.pump_p || !params.omega_p)
            throw std::invalid_argument(
                "build_hamiltonian: rotating frame requires pump_p and omega_p");
        e_cav = params.omega_cav - *params.omega_p;
        e_t = params.omega_t - *params.omega_p;
        h = e_cav * nc.mat + e_t * nt.mat + coupl +
            *params.pump_p * (c.mat + SpMat(c.mat.adjoint()));
    } else {
        h = e_cav * nc.mat + e_t * nt.mat + coupl;
    }

    SparseOperator op;
    op.mat = h;
    op.mat.makeCompressed();
    op.n_c_max = trunc.n_c_max;
    op.n_t_dim = trunc.n_t_dim(params.n_s);
    return op;
}

// max |A - A^dag| <= rtol * max |A|
inline bool is_hermitian(const SpMat& a, double rtol = 1e-12)
{
    const SpMat d = SpMat(a - SpMat(a.adjoint()));
    const double scale = max_abs(a);
    return max_abs(d) <= rtol * std::max(scale, 1e-300);
}

// Plain-text triplet serialization: header "dim n_c_max n_t_dim", then one
// "row col re im" line per entry, sorted by (row, col).
inline void write_triplets(std::ostream& os, const SparseOperator& op)
{
    struct Entry {
        int r, c;
        cxd v;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<size_t>(op.mat.nonZeros()));
    for (int k = 0; k < op.mat.outerSize(); ++k)
        for (SpMat::InnerIterator it(op.mat, k); it; ++it)
            entries.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });

    os << op.dim() << ' ' << op.n_c_max << ' ' << op.n_t_dim << '\n';
    char buf[128];
    for (const Entry& e : entries) {
        std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g\n", e.r, e.c, e.v.real(), e.v.imag());
        os << buf;
    }
}

inline SparseOperator read_triplets(std::istream& is)
{
    SparseOperator op;
    Eigen::Index dim = 0;
    if (!(is >> dim >> op.n_c_max >> op.n_t_dim))
        throw std::invalid_argument("read_triplets: malformed header");
    std::vector<Triplet> t;
    int r = 0, c = 0;
    double re = 0.0, im = 0.0;
    while (is >> r >> c >> re >> im) {
        if (r < 0 || c < 0 || r >= dim || c >= dim)
            throw std::invalid_argument("read_triplets: index out of range");
        t.emplace_back(r, c, cxd(re, im));
    }
    op.mat = SpMat(dim, dim);
    op.mat.setFromTriplets(t.begin(), t.end());
    op.mat.makeCompressed();
    return op;
}

} // namespace trionpol

#endif
