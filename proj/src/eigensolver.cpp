#include <dynlap/eigensolver.hpp>

#include <dynlap/csv.hpp>
#include <dynlap/error.hpp>
#include <dynlap/rng.hpp>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>

namespace dynlap {

namespace {

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v)
{
    Eigen::Index arg = 0;
    for (Eigen::Index k = 1; k < v.size(); ++k) {
        if (std::abs(v[k]) > std::abs(v[arg])) {
            arg = k;
        }
    }
    if (v[arg] < 0.0) {
        v = -v;
    }
}

} // namespace

EigenSolution solve_leading(const TimeAveragedSystem& system, const SolveOptions& options)
{
    const auto& free = system.free_indices;
    const std::size_t n = free.size();
    const std::size_t k = options.count;
    if (k < 1 || k >= n) {
        fail_validation("eigenpair count must satisfy 1 <= k < " + std::to_string(n) + " (free indices), got " +
                        std::to_string(k));
    }
    const Eigen::SparseMatrix<double> d = system.stiffness.restricted(free);
    const Eigen::SparseMatrix<double> m = system.mass.restricted(free);

    // A small positive shift keeps D + sM definite even when some free component is never tied to
    // the boundary (D singular there).
    double trace_d = 0.0;
    double trace_m = 0.0;
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        trace_d += d.coeff(i, i);
        trace_m += m.coeff(i, i);
    }
    const double shift = trace_m > 0.0 ? 1e-8 * trace_d / trace_m : 0.0;
    const Eigen::SparseMatrix<double> a = d + shift * m;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(a);
    if (factor.info() != Eigen::Success) {
        fail_numerical("factorization of the shifted stiffness matrix failed");
    }

    const auto block = static_cast<Eigen::Index>(std::min(n, std::max(2 * k, k + 10)));
    Rng rng(0x5eed);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), block);
    for (Eigen::Index c = 0; c < block; ++c) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            x(r, c) = rng.uniform(-1.0, 1.0);
        }
    }

    Eigen::VectorXd mu;
    std::vector<double> residuals(k, std::numeric_limits<double>::infinity());
    std::size_t iter = 0;
    bool converged = false;
    while (iter < options.max_iter) {
        ++iter;
        const Eigen::MatrixXd y = factor.solve(m * x);
        if (factor.info() != Eigen::Success || !y.allFinite()) {
            fail_numerical("shift-invert solve failed");
        }
        const Eigen::MatrixXd q = orthonormal_basis(y);
        Eigen::MatrixXd dp = q.transpose() * (d * q);
        Eigen::MatrixXd mp = q.transpose() * (m * q);
        dp = 0.5 * (dp + dp.transpose()).eval();
        mp = 0.5 * (mp + mp.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(dp, mp);
        if (ritz.info() != Eigen::Success) {
            fail_numerical("Rayleigh-Ritz projection failed (indefinite mass matrix?)");
        }
        mu = ritz.eigenvalues();
        x = q * ritz.eigenvectors();

        bool all = true;
        for (std::size_t j = 0; j < k; ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            const Eigen::VectorXd r = d * x.col(col) - mu[col] * (m * x.col(col));
            residuals[j] = r.norm() / x.col(col).norm();
            all = all && residuals[j] <= options.tol;
        }
        if (all) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        const double worst = *std::max_element(residuals.begin(), residuals.end());
        fail_numerical("eigensolver did not converge in " + std::to_string(options.max_iter) +
                       " iterations (worst residual " + csv::format_double(worst) + ")");
    }

    EigenSolution out;
    out.iterations = iter;
    const std::size_t dim = system.stiffness.dimension();
    for (std::size_t j = 0; j < k; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        Eigen::VectorXd v = x.col(col);
        v /= std::sqrt(v.dot(m * v));
        fix_sign(v);
        EigenPair pair;
        pair.index = j;
        pair.eigenvalue = -mu[col];
        pair.residual = residuals[j];
        pair.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
        for (std::size_t r = 0; r < n; ++r) {
            pair.coefficients[static_cast<Eigen::Index>(free[r])] = v[static_cast<Eigen::Index>(r)];
        }
        out.pairs.push_back(std::move(pair));
    }
    spdlog::info("eigensolver converged in {} iterations; lambda_1 = {}", iter, out.pairs.front().eigenvalue);
    return out;
}

HatBasisField reconstruct_field(const EigenPair& pair, std::shared_ptr<const TriMesh> mesh)
{
    std::vector<double> c(pair.coefficients.data(), pair.coefficients.data() + pair.coefficients.size());
    return HatBasisField(std::move(mesh), std::move(c));
}

void write_eigenvalues(std::ostream& out, const std::vector<EigenPair>& pairs)
{
    out << "k,eigenvalue\n";
    for (const auto& p : pairs) {
        out << (p.index + 1) << ',' << csv::format_double(p.eigenvalue) << '\n';
    }
}

void write_eigenvectors(std::ostream& out, const std::vector<EigenPair>& pairs)
{
    out << "k,global_index,coefficient\n";
    for (const auto& p : pairs) {
        for (Eigen::Index i = 0; i < p.coefficients.size(); ++i) {
            if (p.coefficients[i] != 0.0) {
                out << (p.index + 1) << ',' << (i + 1) << ',' << csv::format_double(p.coefficients[i]) << '\n';
            }
        }
    }
}

std::vector<EigenPair> read_eigenpairs(std::istream& values, std::istream& vectors, std::size_t dimension)
{
    std::map<std::size_t, EigenPair> by_k;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(values, line)) {
        ++line_no;
        if (line_no == 1 || csv::trim(line).empty()) {
            continue;
        }
        const auto f = csv::split(line);
        const auto k = f.size() == 2 ? csv::parse_int(f[0]) : std::nullopt;
        const auto v = f.size() == 2 ? csv::parse_double(f[1]) : std::nullopt;
        if (!k || !v || *k < 1) {
            fail_validation("malformed eigenvalue row, line " + std::to_string(line_no));
        }
        EigenPair p;
        p.index = static_cast<std::size_t>(*k - 1);
        p.eigenvalue = *v;
        p.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension));
        by_k[p.index] = std::move(p);
    }
    line_no = 0;
    while (std::getline(vectors, line)) {
        ++line_no;
        if (line_no == 1 || csv::trim(line).empty()) {
            continue;
        }
        const auto f = csv::split(line);
        const auto k = f.size() == 3 ? csv::parse_int(f[0]) : std::nullopt;
        const auto g = f.size() == 3 ? csv::parse_int(f[1]) : std::nullopt;
        const auto v = f.size() == 3 ? csv::parse_double(f[2]) : std::nullopt;
        if (!k || !g || !v || *g < 1 || *g > static_cast<std::int64_t>(dimension)) {
            fail_validation("malformed eigenvector row, line " + std::to_string(line_no));
        }
        const auto it = by_k.find(static_cast<std::size_t>(*k - 1));
        if (it == by_k.end()) {
            fail_validation("eigenvector row for unknown k, line " + std::to_string(line_no));
        }
        it->second.coefficients[*g - 1] = *v;
    }
    std::vector<EigenPair> out;
    for (auto& [k, p] : by_k) {
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace dynlap
