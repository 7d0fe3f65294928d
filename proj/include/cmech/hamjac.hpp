#pragma once

#include <map>
#include <string>
#include <vector>

#include "cmech/contact.hpp"
#include "cmech/probe.hpp"

namespace cmech {

/// Section γ(q, z) = (q, γ_1..γ_n, z) of T*Q × R → Q × R, given by its p-components.
/// Points of the base are chart-ordered (q1..qn, z).
class HJSection {
public:
    /// `gamma` are expression strings over the base names (q-names of `cotangent`, then "z").
    HJSection(const Chart& cotangent, const std::vector<std::string>& gamma,
              const std::map<std::string, double>& parameters = {});

    const Chart& chart() const { return chart_; }
    const std::vector<std::string>& base_names() const { return base_; }
    std::size_t n() const { return chart_.n(); }
    const std::vector<Expr>& components() const { return gamma_; }

    /// γ(x) on the cotangent chart.
    std::vector<double> operator()(std::span<const double> x) const;
    /// J(i, k) = ∂γ_i/∂x^k over the base coordinates (q, z).
    Matrix<double> jacobian(std::span<const double> x) const;

private:
    Chart chart_;
    std::vector<std::string> base_;
    std::vector<Expr> gamma_;
};

struct AdmissibilityReport {
    double coiso = 0.0;   // max |∂γ_i/∂q^j − γ_j ∂γ_i/∂z − ∂γ_j/∂q^i + γ_i ∂γ_j/∂z|
    double coiso2 = 0.0;  // max |∂γ_i/∂q^j − ∂γ_j/∂q^i|
    double coiso3 = 0.0;  // max |γ_j ∂γ_i/∂z − γ_i ∂γ_j/∂z|
    bool admissible(double tol = 1e-8) const { return coiso < tol && coiso2 < tol && coiso3 < tol; }
};

AdmissibilityReport admissibility(const HJSection& gamma, std::span<const double> x);

/// Left side of the local Hamilton–Jacobi equation, index j:
///   ∂H/∂q^j + ∂H/∂p_i ∂γ_i/∂q^j + γ_j γ_o − H ∂γ_j/∂z,  γ_o = ∂H/∂z + ∂H/∂p_i ∂γ_i/∂z,
/// with H and its derivatives evaluated at γ(x).
std::vector<double> hj_residual(const ScalarField& H, const HJSection& gamma, std::span<const double> x);

/// ‖X_H(γ(x)) − Tγ(X_H^γ)(x)‖∞ over all 2n + 1 components, X_H^γ = Tπ ∘ X_H ∘ γ.
double relatedness_residual(const ScalarField& H, const HJSection& gamma, std::span<const double> x);

/// |H(γ(x)) − γ_i ∂H/∂p_i(γ(x))|.
double strong_residual(const ScalarField& H, const HJSection& gamma, std::span<const double> x);

// ==================== complete solutions ====================

/// Family Φ_λ given as expressions over (q, z) in parameters l1..ln, together with the
/// recovered functions f_i on the cotangent chart.
struct CompleteSolution {
    Chart chart = Chart::cotangent(1);
    std::vector<std::string> family;
    std::vector<ScalarField> f;

    HJSection section(std::span<const double> lambda) const;
};

struct CompleteSolutionReport {
    double conservation = 0.0;   // max |X_H(f_i)|
    double involution = 0.0;     // max |{f_i, f_j} + f_i R(f_j) − f_j R(f_i)|
    double admissibility = 0.0;  // worst (coiso, coiso2, coiso3) over sampled Φ_λ
    double hj = 0.0;             // worst hj_residual over sampled Φ_λ
};

/// `points` sample T*Q × R; `lambdas` index sections, each checked at the (q, z) part of `points`.
CompleteSolutionReport complete_solution_report(const CompleteSolution& cs, const ScalarField& H,
                                                const Points& points, const Points& lambdas);

}  // namespace cmech
