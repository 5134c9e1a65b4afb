#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace dynlap {

struct SebaOptions {
    std::optional<double> mu;  ///< soft-threshold penalty; default 0.99 / sqrt(rows)
    double tol = 1e-14;        ///< on ||R_new - R||_F
    std::size_t max_iter = 5000;
    std::size_t restarts = 0;  ///< extra runs from seeded random rotations
    std::uint64_t seed = 0;
};

/// Sparse basis approximately spanning a set of eigenvectors, one feature per column.
struct SebaBasis {
    Eigen::MatrixXd columns;  ///< rows x r; each column's maximum entry is 1
    double mu = 0.0;
    std::size_t iterations = 0;
    double rotation_change = 0.0;  ///< ||R_new - R||_F at exit
    bool converged = false;
    double span_residual = 0.0;             ///< ||V V^T S - S||_F / ||S||_F before max-scaling
    std::vector<double> support_fraction;   ///< share of entries above 0.01, per column
    std::vector<double> min_entry;          ///< most negative entry, per column (< -0.2 is suspicious)
    std::vector<std::size_t> source_order;  ///< column index in the unsorted result
};

/// Rotates the columns of `u` (rows x r, linearly independent) into a sparse basis by alternating
/// entrywise soft thresholding and orthogonal Procrustes.
///
/// Columns come back sign-flipped so the largest-magnitude entry is positive, scaled to a maximum
/// of 1, and sorted by descending L1 norm. With restarts, the run with the smallest total L1 norm
/// wins; the identity start is always the first candidate.
SebaBasis seba_rotate(const Eigen::MatrixXd& u, const SebaOptions& options = {});

/// Entrywise maximum across the basis columns.
Eigen::VectorXd max_combine(const SebaBasis& basis);

/// Copies rows onto `indices` of a zero matrix with `dimension` rows.
Eigen::MatrixXd embed_rows(const Eigen::MatrixXd& rows, const std::vector<std::size_t>& indices,
                           std::size_t dimension);

/// `k,global_index,value` for entries with |value| > 1e-12 (k and global_index one-based).
void write_seba(std::ostream& out, const Eigen::MatrixXd& columns);
Eigen::MatrixXd read_seba(std::istream& in, std::size_t dimension);

} // namespace dynlap
