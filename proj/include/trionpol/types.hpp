#ifndef TRIONPOL_TYPES_HPP
#define TRIONPOL_TYPES_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <stdexcept>
#include <string>

namespace trionpol {

using cxd = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cxd>;
using Triplet = Eigen::Triplet<cxd>;

// Thrown on malformed configuration input (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a numerical solve fails or produces garbage (CLI exit code 3).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when the Fock-space cutoff is verifiably too small (CLI exit code 4).
class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Kronecker product of two sparse matrices, triplet-assembled.
inline SpMat kron(const SpMat& a, const SpMat& b)
{
    SpMat c(a.rows() * b.rows(), a.cols() * b.cols());
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<size_t>(a.nonZeros()) * static_cast<size_t>(b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka) {
        for (SpMat::InnerIterator ia(a, ka); ia; ++ia) {
            for (int kb = 0; kb < b.outerSize(); ++kb) {
                for (SpMat::InnerIterator ib(b, kb); ib; ++ib) {
                    triplets.emplace_back(ia.row() * b.rows() + ib.row(),
                                          ia.col() * b.cols() + ib.col(),
                                          ia.value() * ib.value());
                }
            }
        }
    }
    c.setFromTriplets(triplets.begin(), triplets.end());
    return c;
}

// max |A_ij| over stored entries
inline double max_abs(const SpMat& a)
{
    double m = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

// Tr[A rho] for sparse A and dense rho
inline cxd trace_prod(const SpMat& a, const Eigen::MatrixXcd& rho)
{
    cxd s = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            s += it.value() * rho(it.col(), it.row());
    return s;
}

} // namespace trionpol

#endif
