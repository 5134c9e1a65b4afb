#include <dynlap/seba.hpp>

#include <dynlap/csv.hpp>
#include <dynlap/error.hpp>
#include <dynlap/rng.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

namespace dynlap {

namespace {

struct RunResult {
    Eigen::MatrixXd sparse;  // column-normalized, before sign/max scaling
    std::size_t iterations = 0;
    double change = 0.0;
    bool converged = false;
};

double soft_threshold(double z, double mu)
{
    const double m = std::abs(z) - mu;
    return m > 0.0 ? std::copysign(m, z) : 0.0;
}

RunResult run_from(const Eigen::MatrixXd& v, double mu, const Eigen::MatrixXd& r0, const SebaOptions& options)
{
    const Eigen::Index r = v.cols();
    RunResult out;
    Eigen::MatrixXd rot = Eigen::MatrixXd::Zero(r, r);
    Eigen::MatrixXd next = r0;
    Eigen::MatrixXd s(v.rows(), r);
    while ((next - rot).norm() > options.tol && out.iterations < options.max_iter) {
        ++out.iterations;
        rot = next;
        const Eigen::MatrixXd z = v * rot.transpose();
        for (Eigen::Index c = 0; c < r; ++c) {
            for (Eigen::Index i = 0; i < v.rows(); ++i) {
                s(i, c) = soft_threshold(z(i, c), mu);
            }
            const double norm = s.col(c).norm();
            if (norm == 0.0) {
                fail_numerical("soft thresholding annihilated column " + std::to_string(c + 1) +
                               "; use a smaller mu (currently " + csv::format_double(mu) + ")");
            }
            s.col(c) /= norm;
        }
        // Orthogonal Procrustes: the polar factor of S^T V.
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.transpose() * v, Eigen::ComputeFullU | Eigen::ComputeFullV);
        next = svd.matrixU() * svd.matrixV().transpose();
    }
    out.sparse = s;
    out.change = (next - rot).norm();
    out.converged = out.change <= options.tol;
    return out;
}

Eigen::MatrixXd random_rotation(Rng& rng, Eigen::Index r)
{
    Eigen::MatrixXd g(r, r);
    for (Eigen::Index c = 0; c < r; ++c) {
        for (Eigen::Index i = 0; i < r; ++i) {
            g(i, c) = rng.normal();
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(r, r);
}

// Sign flip so the largest-magnitude entry is positive, then scale to a maximum of 1.
Eigen::MatrixXd scaled(const Eigen::MatrixXd& s)
{
    Eigen::MatrixXd out = s;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < out.rows(); ++i) {
            if (std::abs(out(i, c)) > std::abs(out(arg, c))) {
                arg = i;
            }
        }
        out.col(c) /= out(arg, c);
    }
    return out;
}

} // namespace

SebaBasis seba_rotate(const Eigen::MatrixXd& u, const SebaOptions& options)
{
    const Eigen::Index n = u.rows();
    const Eigen::Index r = u.cols();
    if (r < 1 || n < r) {
        fail_validation("SEBA needs 1 <= r <= n, got n=" + std::to_string(n) + ", r=" + std::to_string(r));
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
    const Eigen::MatrixXd upper = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    const double scale = upper.diagonal().cwiseAbs().maxCoeff();
    if (!(upper.diagonal().cwiseAbs().minCoeff() > 1e-12 * scale)) {
        fail_validation("SEBA input columns are not linearly independent");
    }
    const Eigen::MatrixXd v = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
    const double mu = options.mu.value_or(0.99 / std::sqrt(static_cast<double>(n)));
    if (!(mu >= 0.0)) {
        fail_validation("SEBA mu must be nonnegative");
    }

    RunResult best = run_from(v, mu, Eigen::MatrixXd::Identity(r, r), options);
    double best_l1 = scaled(best.sparse).cwiseAbs().sum();
    Rng rng(options.seed);
    for (std::size_t k = 0; k < options.restarts; ++k) {
        const Eigen::MatrixXd r0 = random_rotation(rng, r);
        RunResult candidate;
        try {
            candidate = run_from(v, mu, r0, options);
        } catch (const Error&) {
            continue;
        }
        const double l1 = scaled(candidate.sparse).cwiseAbs().sum();
        if (l1 < best_l1) {
            best = std::move(candidate);
            best_l1 = l1;
        }
    }

    SebaBasis out;
    out.mu = mu;
    out.iterations = best.iterations;
    out.rotation_change = best.change;
    out.converged = best.converged;
    const Eigen::MatrixXd& s = best.sparse;
    out.span_residual = (v * (v.transpose() * s) - s).norm() / s.norm();

    const Eigen::MatrixXd unsorted = scaled(s);
    std::vector<double> l1(static_cast<std::size_t>(r));
    for (Eigen::Index c = 0; c < r; ++c) {
        l1[static_cast<std::size_t>(c)] = unsorted.col(c).cwiseAbs().sum();
    }
    out.source_order.resize(static_cast<std::size_t>(r));
    std::iota(out.source_order.begin(), out.source_order.end(), std::size_t{0});
    std::stable_sort(out.source_order.begin(), out.source_order.end(),
                     [&](std::size_t a, std::size_t b) { return l1[a] > l1[b]; });
    out.columns.resize(n, r);
    for (Eigen::Index c = 0; c < r; ++c) {
        const auto src = static_cast<Eigen::Index>(out.source_order[static_cast<std::size_t>(c)]);
        out.columns.col(c) = unsorted.col(src);
        out.support_fraction.push_back(static_cast<double>((out.columns.col(c).array() > 0.01).count()) /
                                       static_cast<double>(n));
        out.min_entry.push_back(out.columns.col(c).minCoeff());
    }
    return out;
}

Eigen::VectorXd max_combine(const SebaBasis& basis)
{
    if (basis.columns.cols() < 1) {
        fail_validation("max-combination needs at least one column");
    }
    return basis.columns.rowwise().maxCoeff();
}

Eigen::MatrixXd embed_rows(const Eigen::MatrixXd& rows, const std::vector<std::size_t>& indices,
                           std::size_t dimension)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dimension), rows.cols());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out.row(static_cast<Eigen::Index>(indices[k])) = rows.row(static_cast<Eigen::Index>(k));
    }
    return out;
}

void write_seba(std::ostream& out, const Eigen::MatrixXd& columns)
{
    out << "k,global_index,value\n";
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        for (Eigen::Index i = 0; i < columns.rows(); ++i) {
            if (std::abs(columns(i, c)) > 1e-12) {
                out << (c + 1) << ',' << (i + 1) << ',' << csv::format_double(columns(i, c)) << '\n';
            }
        }
    }
}

Eigen::MatrixXd read_seba(std::istream& in, std::size_t dimension)
{
    struct Entry {
        std::int64_t k;
        std::int64_t g;
        double v;
    };
    std::vector<Entry> entries;
    std::int64_t max_k = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || csv::trim(line).empty()) {
            continue;
        }
        const auto f = csv::split(line);
        const auto k = f.size() == 3 ? csv::parse_int(f[0]) : std::nullopt;
        const auto g = f.size() == 3 ? csv::parse_int(f[1]) : std::nullopt;
        const auto v = f.size() == 3 ? csv::parse_double(f[2]) : std::nullopt;
        if (!k || !g || !v || *k < 1 || *g < 1 || *g > static_cast<std::int64_t>(dimension)) {
            fail_validation("malformed SEBA row, line " + std::to_string(line_no));
        }
        entries.push_back({*k, *g, *v});
        max_k = std::max(max_k, *k);
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dimension), max_k);
    for (const auto& e : entries) {
        out(e.g - 1, e.k - 1) = e.v;
    }
    return out;
}

} // namespace dynlap
