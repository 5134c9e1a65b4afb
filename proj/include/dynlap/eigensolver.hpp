#pragma once

#include <dynlap/fem.hpp>
#include <dynlap/mesh.hpp>

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

namespace dynlap {

/// One eigenpair of -D u = lambda M u; coefficients span the full global index space and are
/// zero at constrained indices.
struct EigenPair {
    std::size_t index = 0;  ///< spectral order, zero-based
    double eigenvalue = 0.0;
    Eigen::VectorXd coefficients;
    double residual = 0.0;  ///< ||D u - mu M u|| / ||u|| on the free indices
};

struct SolveOptions {
    std::size_t count = 8;
    double tol = 1e-8;
    std::size_t max_iter = 5000;
};

struct EigenSolution {
    std::vector<EigenPair> pairs;
    std::size_t iterations = 0;
};

/// Leading eigenpairs (eigenvalues closest to zero) of the constrained averaged system.
///
/// Shift-inverted subspace iteration with Rayleigh-Ritz projection. Each vector is M-normalized
/// on the free indices and signed so that its largest-magnitude entry is positive.
EigenSolution solve_leading(const TimeAveragedSystem& system, const SolveOptions& options = {});

/// The eigenfunction carried by `mesh`'s hat basis: sum_i u_i phi_i^t.
HatBasisField reconstruct_field(const EigenPair& pair, std::shared_ptr<const TriMesh> mesh);

/// `k,eigenvalue` and `k,global_index,coefficient` tables (k and global_index one-based).
void write_eigenvalues(std::ostream& out, const std::vector<EigenPair>& pairs);
void write_eigenvectors(std::ostream& out, const std::vector<EigenPair>& pairs);
std::vector<EigenPair> read_eigenpairs(std::istream& values, std::istream& vectors, std::size_t dimension);

} // namespace dynlap
