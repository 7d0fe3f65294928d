#include "cmech/hamjac.hpp"

#include <cmath>

namespace cmech {

HJSection::HJSection(const Chart& cotangent, const std::vector<std::string>& gamma,
                     const std::map<std::string, double>& parameters)
    : chart_(cotangent) {
    if (cotangent.kind() != ChartKind::cotangent) throw ConfigError("section", "sections live on a cotangent chart");
    if (gamma.size() != cotangent.n()) throw ConfigError("section", "one component per configuration variable");
    for (std::size_t i = 0; i < cotangent.n(); ++i) base_.push_back(cotangent.names()[i]);
    base_.push_back(cotangent.names()[cotangent.z()]);
    for (const auto& g : gamma) gamma_.push_back(parse(g, base_, parameters));
}

std::vector<double> HJSection::operator()(std::span<const double> x) const {
    const std::size_t n = this->n();
    std::vector<double> y(2 * n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = x[i];
        y[n + i] = gamma_[i].eval(x);
    }
    y[2 * n] = x[n];
    return y;
}

Matrix<double> HJSection::jacobian(std::span<const double> x) const {
    Matrix<double> J(n(), n() + 1);
    for (std::size_t i = 0; i < n(); ++i) {
        auto g = grad(gamma_[i], x);
        J.set_row(i, std::span<const double>(g));
    }
    return J;
}

AdmissibilityReport admissibility(const HJSection& gamma, std::span<const double> x) {
    const std::size_t n = gamma.n();
    auto J = gamma.jacobian(x);
    auto y = gamma(x);
    AdmissibilityReport rep;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double gi = y[n + i], gj = y[n + j];
            const double c2 = J(i, j) - J(j, i);
            const double c3 = gj * J(i, n) - gi * J(j, n);
            rep.coiso = std::max(rep.coiso, std::abs(c2 - c3));
            rep.coiso2 = std::max(rep.coiso2, std::abs(c2));
            rep.coiso3 = std::max(rep.coiso3, std::abs(c3));
        }
    }
    return rep;
}

std::vector<double> hj_residual(const ScalarField& H, const HJSection& gamma, std::span<const double> x) {
    const std::size_t n = gamma.n();
    auto y = gamma(x);
    auto J = gamma.jacobian(x);
    auto dH = gradient(H, y);
    const double h = H(y);
    double go = dH[2 * n];
    for (std::size_t i = 0; i < n; ++i) go += dH[n + i] * J(i, n);
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = dH[j];
        for (std::size_t i = 0; i < n; ++i) s += dH[n + i] * J(i, j);
        r[j] = s + y[n + j] * go - h * J(j, n);
    }
    return r;
}

double relatedness_residual(const ScalarField& H, const HJSection& gamma, std::span<const double> x) {
    const std::size_t n = gamma.n();
    auto y = gamma(x);
    auto XH = hamiltonian_vector(canonical_contact(n), H, std::span<const double>(y));
    // X_H^γ on Q × R: (q̇, ż) read off X_H along the section.
    std::vector<double> base(n + 1);
    for (std::size_t i = 0; i < n; ++i) base[i] = XH[i];
    base[n] = XH[2 * n];
    auto J = gamma.jacobian(x);
    auto dgamma = J * base;
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) r = std::max(r, std::abs(XH[n + j] - dgamma[j]));
    return r;  // q- and z-components agree by construction
}

double strong_residual(const ScalarField& H, const HJSection& gamma, std::span<const double> x) {
    const std::size_t n = gamma.n();
    auto y = gamma(x);
    auto dH = gradient(H, y);
    double s = H(y);
    for (std::size_t i = 0; i < n; ++i) s -= y[n + i] * dH[n + i];
    return std::abs(s);
}

// ==================== complete solutions ====================

HJSection CompleteSolution::section(std::span<const double> lambda) const {
    std::map<std::string, double> params;
    for (std::size_t i = 0; i < lambda.size(); ++i) params["l" + std::to_string(i + 1)] = lambda[i];
    return HJSection(chart, family, params);
}

CompleteSolutionReport complete_solution_report(const CompleteSolution& cs, const ScalarField& H,
                                                const Points& points, const Points& lambdas) {
    const std::size_t n = cs.chart.n();
    HamiltonianSystem sys{canonical_contact(n), H};
    auto XH = hamiltonian_vf(sys);
    JacobiStructure j(sys.structure);
    CompleteSolutionReport rep;
    for (const auto& p : points) {
        std::span<const double> x(p);
        for (std::size_t a = 0; a < cs.f.size(); ++a) {
            rep.conservation = std::max(rep.conservation, std::abs(directional(cs.f[a], XH, x)));
            const double ra = gradient(cs.f[a], x)[2 * n];
            for (std::size_t b = a + 1; b < cs.f.size(); ++b) {
                const double rb = gradient(cs.f[b], x)[2 * n];
                double inv = jacobi_bracket(j, cs.f[a], cs.f[b], x) + cs.f[a](x) * rb - cs.f[b](x) * ra;
                rep.involution = std::max(rep.involution, std::abs(inv));
            }
        }
    }
    for (const auto& lam : lambdas) {
        auto sec = cs.section(lam);
        for (const auto& p : points) {
            std::vector<double> base(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n));
            base.push_back(p[2 * n]);
            auto adm = admissibility(sec, base);
            rep.admissibility = std::max({rep.admissibility, adm.coiso, adm.coiso2, adm.coiso3});
            rep.hj = std::max(rep.hj, max_abs(hj_residual(H, sec, base)));
        }
    }
    return rep;
}

}  // namespace cmech
