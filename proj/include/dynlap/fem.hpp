#pragma once

#include <dynlap/mesh.hpp>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace dynlap {

/// Square sparse matrix stored in full (both triangles), exactly symmetric.
class SparseSymmetric {
public:
    SparseSymmetric() = default;
    /// Throws if `m` is not square or not exactly symmetric.
    explicit SparseSymmetric(Eigen::SparseMatrix<double> m);

    std::size_t dimension() const { return static_cast<std::size_t>(m_.rows()); }
    double entry(std::size_t i, std::size_t j) const
    {
        return m_.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const Eigen::SparseMatrix<double>& matrix() const { return m_; }

    /// Principal submatrix on `indices` (ascending), in that order.
    Eigen::SparseMatrix<double> restricted(const std::vector<std::size_t>& indices) const;

private:
    Eigen::SparseMatrix<double> m_;
};

using ElementMatrix = Eigen::Matrix3d;

/// P1 stiffness: K_ab = area * grad(phi_a) . grad(phi_b). Rows sum to zero.
ElementMatrix local_stiffness(const std::array<LonLat, 3>& tri);

/// P1 mass: M_ab = area / 12 * (2 if a == b else 1).
ElementMatrix local_mass(const std::array<LonLat, 3>& tri);

struct SliceMatrices {
    SparseSymmetric stiffness;
    SparseSymmetric mass;
};

/// Sums element matrices into the full (I + C)-dimensional index space. Rows and columns of
/// indices absent from the mesh stay identically zero.
SliceMatrices assemble_slice(const TriMesh& mesh);

/// Zero matrices for a month that could not be meshed.
SliceMatrices empty_slice(std::size_t dimension);

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;  ///< one past the last
};

/// Averaged stiffness/mass over all months, with the Dirichlet-constrained indices removed from
/// `free_indices`.
struct TimeAveragedSystem {
    SparseSymmetric stiffness;
    SparseSymmetric mass;
    std::vector<std::size_t> free_indices;  ///< ascending
    std::size_t slice_count = 0;
};

/// (1/T) sum of the slices; free indices exclude `coast` and every index whose averaged mass
/// diagonal is below `drop_tol` (default 1e-14 times the mean averaged mass diagonal).
TimeAveragedSystem average_system(const std::vector<SliceMatrices>& slices, IndexRange coast,
                                  std::optional<double> drop_tol = std::nullopt);

/// Coordinate text `row col value`, one-based indices, upper triangle only.
void write_matrix(std::ostream& out, const SparseSymmetric& m);
SparseSymmetric read_matrix(std::istream& in, std::size_t dimension);

} // namespace dynlap
