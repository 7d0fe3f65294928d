#include "cmech/linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>

namespace cmech {

namespace {

Eigen::MatrixXd to_eigen(const Matrix<double>& a) {
    Eigen::MatrixXd m(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    return m;
}

std::size_t rank_of(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd, double rel_tol) {
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

}  // namespace

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> singular_values(const Matrix<double>& a) {
    if (a.rows() == 0 || a.cols() == 0) return {};
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
    const auto& s = svd.singularValues();
    return std::vector<double>(s.data(), s.data() + s.size());
}

std::size_t numerical_rank(const Matrix<double>& a, double rel_tol) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
    return rank_of(svd, rel_tol);
}

std::vector<std::vector<double>> null_space(const Matrix<double>& a, double rel_tol) {
    const std::size_t n = a.cols();
    std::vector<std::vector<double>> basis;
    if (a.rows() == 0) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> e(n, 0.0);
            e[i] = 1.0;
            basis.push_back(e);
        }
        return basis;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a), Eigen::ComputeFullV);
    const std::size_t r = rank_of(svd, rel_tol);
    const Eigen::MatrixXd& v = svd.matrixV();
    for (std::size_t k = r; k < n; ++k) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = v(i, k);
        for (double c : col) {
            if (std::abs(c) > 1e-12) {
                if (c < 0) for (double& x : col) x = -x;
                break;
            }
        }
        basis.push_back(col);
    }
    return basis;
}

std::vector<std::size_t> independent_rows(const Matrix<double>& a, double rel_tol) {
    std::vector<std::size_t> chosen;
    double scale = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) scale = std::max(scale, std::abs(a(i, j)));
    if (scale == 0.0) return chosen;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        std::vector<std::size_t> trial = chosen;
        trial.push_back(i);
        Matrix<double> s = select_rows(a, trial);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(s));
        const auto& sv = svd.singularValues();
        // Smallest singular value measured against the global scale of `a`.
        if (sv.size() == static_cast<Eigen::Index>(trial.size()) && sv(sv.size() - 1) > rel_tol * scale)
            chosen = trial;
        if (chosen.size() == a.cols()) break;
    }
    return chosen;
}

std::vector<double> pseudo_solve(const Matrix<double>& a, std::span<const double> b, double rel_tol) {
    Eigen::MatrixXd m = to_eigen(a);
    Eigen::VectorXd rhs(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) rhs(i) = b[i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(rel_tol);
    Eigen::VectorXd x = svd.solve(rhs);
    return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace cmech
