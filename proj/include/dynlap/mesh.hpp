#pragma once

#include <dynlap/delaunay.hpp>
#include <dynlap/geo.hpp>
#include <dynlap/trajectory.hpp>

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace dynlap {

/// Triangulation of one month's reporting floats plus the coastline points.
///
/// Global indices are zero-based: floats occupy 0..I-1 and coastline point j sits at I+j.
/// Triangles are stored counter-clockwise in the lon/lat plane.
class TriMesh {
public:
    TriMesh(std::vector<LonLat> vertices, std::vector<std::size_t> global_index, std::vector<Triangle> triangles,
            std::size_t float_count, std::size_t dimension);

    const std::vector<LonLat>& vertices() const { return vertices_; }
    const std::vector<std::size_t>& global_index() const { return global_index_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    std::size_t float_count() const { return float_count_; }
    /// I + C, the size of the global index space.
    std::size_t dimension() const { return dimension_; }

    std::array<LonLat, 3> corners(std::size_t tri) const;
    double triangle_area(std::size_t tri) const;
    double total_area() const;

private:
    std::vector<LonLat> vertices_;
    std::vector<std::size_t> global_index_;
    std::vector<Triangle> triangles_;
    std::size_t float_count_;
    std::size_t dimension_;
};

/// Delaunay mesh of {x_{i,t} : i in R_t} together with the coastline points, t zero-based.
/// Coincident points are merged, the lower global index (a float before a coastline point) kept.
TriMesh triangulate_slice(const TrajectoryArray& traj, std::size_t t, const CoastlineSet& coast);

/// Drops triangles having an edge longer than `max_edge_km` along the great circle, or an edge
/// spanning more than 180 degrees of longitude (which would cross the antimeridian cut).
TriMesh filter_triangles(const TriMesh& mesh, double max_edge_km);

/// Bucket grid over a mesh's triangles for point location.
class TriangleLocator {
public:
    explicit TriangleLocator(const TriMesh& mesh);

    struct Hit {
        std::size_t triangle;
        std::array<double, 3> barycentric;
    };
    /// First triangle (lowest index) containing p, boundary inclusive.
    std::optional<Hit> locate(LonLat p) const;

private:
    const TriMesh* mesh_;
    double min_lon_ = 0.0;
    double min_lat_ = 0.0;
    double cell_ = 1.0;
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<std::vector<std::uint32_t>> buckets_;
};

/// Piecewise-linear field sum_i c_i phi_i on one mesh; coefficients are indexed by global index.
class HatBasisField {
public:
    HatBasisField(std::shared_ptr<const TriMesh> mesh, std::vector<double> coefficients);

    const TriMesh& mesh() const { return *mesh_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    double vertex_value(std::size_t vertex) const { return coefficients_[mesh_->global_index()[vertex]]; }

    /// Linear interpolation inside the containing triangle; nullopt outside the mesh.
    std::optional<double> evaluate(LonLat p) const;

private:
    std::shared_ptr<const TriMesh> mesh_;
    std::vector<double> coefficients_;
    std::shared_ptr<const TriangleLocator> locator_;
};

/// Mesh dump: vertices `global_index,lon,lat` (one-based global index) and triangles `v1,v2,v3`
/// (zero-based rows of the vertex file).
void write_mesh_vertices(std::ostream& out, const TriMesh& mesh);
void write_mesh_triangles(std::ostream& out, const TriMesh& mesh);
TriMesh read_mesh(std::istream& vertices, std::istream& triangles, std::size_t float_count, std::size_t dimension);

} // namespace dynlap
