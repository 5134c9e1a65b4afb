#include <dynlap/fem.hpp>

#include <dynlap/csv.hpp>
#include <dynlap/error.hpp>

#include <Eigen/SparseCholesky>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

namespace dynlap {

namespace {

constexpr double kMinElementArea = 1e-12;

double element_area(const std::array<LonLat, 3>& p)
{
    const double a = 0.5 * ((p[1].lon - p[0].lon) * (p[2].lat - p[0].lat) - (p[1].lat - p[0].lat) * (p[2].lon - p[0].lon));
    if (!(std::abs(a) > kMinElementArea)) {
        fail_numerical("degenerate triangle (area " + csv::format_double(std::abs(a)) + ")");
    }
    return std::abs(a);
}

} // namespace

SparseSymmetric::SparseSymmetric(Eigen::SparseMatrix<double> m) : m_(std::move(m))
{
    if (m_.rows() != m_.cols()) {
        fail_validation("symmetric matrix must be square");
    }
    m_.makeCompressed();
    for (Eigen::Index col = 0; col < m_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(m_, col); it; ++it) {
            if (it.row() < it.col() && m_.coeff(it.col(), it.row()) != it.value()) {
                fail_validation("matrix is not exactly symmetric at (" + std::to_string(it.row() + 1) + ", " +
                                std::to_string(it.col() + 1) + ")");
            }
        }
    }
}

Eigen::SparseMatrix<double> SparseSymmetric::restricted(const std::vector<std::size_t>& indices) const
{
    std::vector<Eigen::Index> position(dimension(), -1);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        position[indices[k]] = static_cast<Eigen::Index>(k);
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m_.nonZeros()));
    for (Eigen::Index col = 0; col < m_.outerSize(); ++col) {
        const Eigen::Index pc = position[static_cast<std::size_t>(col)];
        if (pc < 0) {
            continue;
        }
        for (Eigen::SparseMatrix<double>::InnerIterator it(m_, col); it; ++it) {
            const Eigen::Index pr = position[static_cast<std::size_t>(it.row())];
            if (pr >= 0) {
                triplets.emplace_back(pr, pc, it.value());
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(indices.size());
    Eigen::SparseMatrix<double> out(n, n);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

ElementMatrix local_stiffness(const std::array<LonLat, 3>& tri)
{
    const double area = element_area(tri);
    // Edge opposite vertex a; grad(phi_a) is this edge rotated by 90 degrees over 2 * area.
    std::array<Eigen::Vector2d, 3> edge;
    for (int a = 0; a < 3; ++a) {
        const LonLat& from = tri[(a + 1) % 3];
        const LonLat& to = tri[(a + 2) % 3];
        edge[a] = {to.lon - from.lon, to.lat - from.lat};
    }
    ElementMatrix k;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            k(a, b) = edge[a].dot(edge[b]) / (4.0 * area);
        }
    }
    return k;
}

ElementMatrix local_mass(const std::array<LonLat, 3>& tri)
{
    const double area = element_area(tri);
    ElementMatrix m;
    m.setConstant(area / 12.0);
    m.diagonal().setConstant(area / 6.0);
    return m;
}

SliceMatrices assemble_slice(const TriMesh& mesh)
{
    const auto n = static_cast<Eigen::Index>(mesh.dimension());
    std::vector<Eigen::Triplet<double>> dk;
    std::vector<Eigen::Triplet<double>> mk;
    dk.reserve(9 * mesh.triangles().size());
    mk.reserve(9 * mesh.triangles().size());
    const auto& gidx = mesh.global_index();
    for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
        const auto corners = mesh.corners(t);
        const ElementMatrix k = local_stiffness(corners);
        const ElementMatrix m = local_mass(corners);
        const auto& tri = mesh.triangles()[t];
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const auto row = static_cast<Eigen::Index>(gidx[tri[a]]);
                const auto col = static_cast<Eigen::Index>(gidx[tri[b]]);
                dk.emplace_back(row, col, k(a, b));
                mk.emplace_back(row, col, m(a, b));
            }
        }
    }
    Eigen::SparseMatrix<double> d(n, n);
    Eigen::SparseMatrix<double> m(n, n);
    d.setFromTriplets(dk.begin(), dk.end());
    m.setFromTriplets(mk.begin(), mk.end());
    return {SparseSymmetric(std::move(d)), SparseSymmetric(std::move(m))};
}

SliceMatrices empty_slice(std::size_t dimension)
{
    const auto n = static_cast<Eigen::Index>(dimension);
    return {SparseSymmetric(Eigen::SparseMatrix<double>(n, n)), SparseSymmetric(Eigen::SparseMatrix<double>(n, n))};
}

TimeAveragedSystem average_system(const std::vector<SliceMatrices>& slices, IndexRange coast,
                                  std::optional<double> drop_tol)
{
    if (slices.empty()) {
        fail_validation("averaging needs at least one slice");
    }
    const std::size_t n = slices.front().stiffness.dimension();
    for (const auto& s : slices) {
        if (s.stiffness.dimension() != n || s.mass.dimension() != n) {
            fail_validation("slices differ in dimension");
        }
    }
    if (coast.begin > coast.end || coast.end > n) {
        fail_validation("coastline index range outside the system");
    }

    Eigen::SparseMatrix<double> d_sum = slices.front().stiffness.matrix();
    Eigen::SparseMatrix<double> m_sum = slices.front().mass.matrix();
    for (std::size_t k = 1; k < slices.size(); ++k) {
        d_sum += slices[k].stiffness.matrix();
        m_sum += slices[k].mass.matrix();
    }
    const double inv_t = 1.0 / static_cast<double>(slices.size());
    d_sum *= inv_t;
    m_sum *= inv_t;
    d_sum.prune(0.0);
    m_sum.prune(0.0);

    TimeAveragedSystem sys;
    sys.stiffness = SparseSymmetric(std::move(d_sum));
    sys.mass = SparseSymmetric(std::move(m_sum));
    sys.slice_count = slices.size();

    const Eigen::VectorXd diag = sys.mass.matrix().diagonal();
    const double tol = drop_tol.value_or(1e-14 * diag.mean());
    std::size_t isolated = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= coast.begin && i < coast.end) {
            continue;
        }
        if (diag[static_cast<Eigen::Index>(i)] < tol || diag[static_cast<Eigen::Index>(i)] <= 0.0) {
            ++isolated;
            continue;
        }
        sys.free_indices.push_back(i);
    }
    if (sys.free_indices.empty()) {
        fail_numerical("no free indices remain after applying boundary constraints");
    }

    // Mass restricted to free indices must be positive definite.
    const Eigen::SparseMatrix<double> m_free = sys.mass.restricted(sys.free_indices);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(m_free);
    if (llt.info() != Eigen::Success) {
        std::size_t worst = 0;
        for (std::size_t k = 1; k < sys.free_indices.size(); ++k) {
            if (m_free.coeff(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) <
                m_free.coeff(static_cast<Eigen::Index>(worst), static_cast<Eigen::Index>(worst))) {
                worst = k;
            }
        }
        fail_numerical("averaged mass matrix is not positive definite on the free indices (near global index " +
                       std::to_string(sys.free_indices[worst] + 1) + ")");
    }
    if (isolated > 0) {
        spdlog::info("{} never-meshed or isolated float indices excluded from the free set", isolated);
    }
    return sys;
}

void write_matrix(std::ostream& out, const SparseSymmetric& m)
{
    const auto& mat = m.matrix();
    // Row-major traversal of the upper triangle for a stable, readable order.
    std::vector<std::vector<std::pair<Eigen::Index, double>>> rows(m.dimension());
    for (Eigen::Index col = 0; col < mat.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(mat, col); it; ++it) {
            if (it.row() <= it.col()) {
                rows[static_cast<std::size_t>(it.row())].emplace_back(it.col(), it.value());
            }
        }
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (const auto& [c, v] : rows[r]) {
            out << (r + 1) << ' ' << (c + 1) << ' ' << csv::format_double(v) << '\n';
        }
    }
}

SparseSymmetric read_matrix(std::istream& in, std::size_t dimension)
{
    std::vector<Eigen::Triplet<double>> triplets;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = csv::trim(line);
        if (trimmed.empty()) {
            continue;
        }
        std::vector<std::string_view> parts;
        std::size_t pos = 0;
        while (pos < trimmed.size()) {
            const auto next = trimmed.find(' ', pos);
            const auto len = (next == std::string_view::npos ? trimmed.size() : next) - pos;
            if (len > 0) {
                parts.push_back(trimmed.substr(pos, len));
            }
            if (next == std::string_view::npos) {
                break;
            }
            pos = next + 1;
        }
        const auto r = parts.size() == 3 ? csv::parse_int(parts[0]) : std::nullopt;
        const auto c = parts.size() == 3 ? csv::parse_int(parts[1]) : std::nullopt;
        const auto v = parts.size() == 3 ? csv::parse_double(parts[2]) : std::nullopt;
        if (!r || !c || !v || *r < 1 || *c < 1 || *r > static_cast<std::int64_t>(dimension) ||
            *c > static_cast<std::int64_t>(dimension)) {
            fail_validation("malformed matrix entry, line " + std::to_string(line_no));
        }
        triplets.emplace_back(*r - 1, *c - 1, *v);
        if (*r != *c) {
            triplets.emplace_back(*c - 1, *r - 1, *v);
        }
    }
    const auto n = static_cast<Eigen::Index>(dimension);
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return SparseSymmetric(std::move(m));
}

} // namespace dynlap
