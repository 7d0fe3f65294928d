#pragma once

#include <optional>
#include <vector>

#include "cmech/herglotz.hpp"

namespace cmech {

// ==================== precontact systems ====================

/// Precontact Hamiltonian system (M, η, H) with ♭̄(v) = i_v dη + η(v) η.
///
/// Three presentations: Darboux (x, y, z, u) with η = dz − y_i dx^i, a form given by
/// expressions on any chart, or the Lagrangian side (TQ × R, η_L, E_L).
class PrecontactSystem {
public:
    enum class Kind { darboux, form, lagrangian };

    static PrecontactSystem darboux(std::size_t r, std::size_t s, const std::string& H);
    static PrecontactSystem from_form(const Chart& chart, const std::vector<std::string>& eta, const std::string& H);
    static PrecontactSystem from_lagrangian(const LagrangianSystem& sys);

    Kind kind() const { return kind_; }
    const Chart& chart() const { return chart_; }
    std::size_t dim() const { return chart_.dim(); }
    const std::optional<LagrangianSystem>& lagrangian() const { return lagrangian_; }

    /// Adds K c to the Reeb field, K the projector onto the characteristic kernel.
    PrecontactSystem with_reeb_shift(std::vector<double> c) const;

    std::vector<double> eta(std::span<const double> x) const;
    double hamiltonian(std::span<const double> x) const;
    /// Matrix of ♭̄ at x: (♭̄ v)_k = Σ_j F(k, j) v_j.
    Matrix<double> flat_bar(std::span<const double> x) const;
    /// A Reeb field: ♭̄(R) = η, minimal norm plus the configured kernel shift.
    std::vector<double> reeb(std::span<const double> x) const;
    /// γ_H = dH − (H + R(H)) η.
    std::vector<double> gamma_h(std::span<const double> x) const;

    /// Implementation hook for the templated evaluators in the library.
    struct Access;

private:
    Kind kind_ = Kind::darboux;
    Chart chart_ = Chart::precontact(1, 1);
    std::vector<Expr> eta_;
    Expr H_;
    std::optional<LagrangianSystem> lagrangian_;
    std::vector<double> reeb_shift_;
    std::size_t r_ = 0;
};

struct PrecontactClass {
    std::size_t r = 0;
    std::size_t s = 0;
    std::optional<std::size_t> hessian_rank;  // Lagrangian charts only
};

/// Class 2r + 1 from the numerical rank of ♭̄ (threshold 1e-9 σ_max).
/// Throws BoundaryRank when a singular value sits within a factor 100 of the threshold.
PrecontactClass precontact_class(const PrecontactSystem& sys, std::span<const double> x);

/// Orthonormal basis of C = ker ♭̄ (deterministic SVD sign convention).
std::vector<std::vector<double>> characteristic_kernel(const PrecontactSystem& sys, std::span<const double> x);

/// Δ^⊥ = (♭̄ Δ)^o for Δ spanned by `basis`.
std::vector<std::vector<double>> perp(const PrecontactSystem& sys, const std::vector<std::vector<double>>& basis,
                                      std::span<const double> x);

// ==================== constraint algorithm ====================

struct LadderStep {
    std::size_t generators = 0;   // length of the evaluator output
    std::size_t rank = 0;         // independent constraints added on M_{i-1}
    std::size_t dimension = 0;    // estimated dim M_i
    double max_value = 0.0;       // max |batch| over the M_{i-1} probes
    std::size_t probes = 0;       // probes that reached M_i
};

/// Batches of numeric constraints; batch i (1-based) cuts M_i out of M_{i-1}.
class ConstraintLadder {
public:
    ConstraintLadder(PrecontactSystem sys) : sys_(std::move(sys)) {}

    const PrecontactSystem& system() const { return sys_; }
    const std::vector<LadderStep>& steps() const { return steps_; }
    std::size_t size() const { return steps_.size(); }
    std::size_t final_dimension() const { return steps_.empty() ? sys_.dim() : steps_.back().dimension; }
    const Points& probes() const { return probes_; }

    /// Generator values of batch k (1 <= k <= size() + 1) at x: K_⊥ γ_H with K_⊥ the
    /// projector onto (T M_{k-1})^⊥; zero exactly on M_k.
    std::vector<double> batch(std::size_t k, std::span<const double> x) const;
    /// Stacked values of batches 1..k.
    std::vector<double> constraints(std::size_t k, std::span<const double> x) const;
    /// Jacobian of constraints(k).
    Matrix<double> constraint_jacobian(std::size_t k, std::span<const double> x) const;

    /// Gauss–Newton projection onto M_k (tol 1e-10, 30 iterations); nullopt on failure.
    std::optional<std::vector<double>> project(std::size_t k, std::span<const double> x) const;

    void push(LadderStep step, Points probes) {
        steps_.push_back(step);
        probes_ = std::move(probes);
    }
    void set_probes(Points probes) { probes_ = std::move(probes); }

private:
    PrecontactSystem sys_;
    std::vector<LadderStep> steps_;
    Points probes_;
};

/// One iteration: evaluates batch size()+1 on the current probes and, if some value exceeds
/// 1e-8, appends it and projects the probes onto the new manifold. Returns false when stable.
/// Throws RankUnstable when probes disagree on the rank of the constraint differential.
bool constraint_step(ConstraintLadder& ladder);

/// Iterates from 64 seeded Halton probes in [-2, 2]^dim. Throws NoConvergence after
/// `max_iters` emitting steps and EmptyFinalManifold when no probe reaches a manifold.
ConstraintLadder run_algorithm(const PrecontactSystem& sys, std::size_t max_iters = 10,
                               std::uint64_t seed = default_seed);

// ==================== Dirac–Jacobi ====================

/// Constraints split into second class φ^a (invertible Gram block) and first class φ̄^ā.
class DiracData {
public:
    DiracData(JacobiStructure j, std::vector<ScalarField> constraints, std::vector<std::size_t> second,
              std::vector<std::size_t> first);

    const JacobiStructure& jacobi() const { return j_; }
    const std::vector<ScalarField>& constraints() const { return phi_; }
    const std::vector<std::size_t>& second_class() const { return second_; }
    const std::vector<std::size_t>& first_class() const { return first_; }

    /// C^{ab} = {φ^a, φ^b} over the second-class constraints.
    Matrix<double> C(std::span<const double> x) const;
    /// φ̄^ā = φ^ā − B^ā_a φ^a with B = {φ^ā, φ^b} C^{-1}.
    std::vector<ScalarField> first_class_fields() const;

    double first_class_residual = 0.0;  // max |{φ̄^ā, φ^β}| over the M_f probes
    std::size_t gram_rank = 0;
    Points probes;

private:
    JacobiStructure j_;
    std::vector<ScalarField> phi_;
    std::vector<std::size_t> second_;
    std::vector<std::size_t> first_;
};

/// Gram matrix rank on M_f probes (defaults: 20 random points projected onto the zero set).
/// Throws RankUnstable when probes disagree.
DiracData classify_constraints(const std::vector<ScalarField>& constraints, const JacobiStructure& j,
                               const Points& probes = {});

/// Random points in [-2, 2]^dim projected onto the common zero set of `constraints`.
Points project_onto(const std::vector<ScalarField>& constraints, const Points& points);

/// {f, g}_DJ = {f, g} − {f, φ^a} C_ab {φ^b, g}. Throws SingularCMatrix.
double dirac_jacobi_bracket(const DiracData& dd, const ScalarField& f, const ScalarField& g,
                            std::span<const double> x);

/// R_DJ = R + C_ab R(φ^b) (♯_Λ dφ^a − φ^a R), so {fg, h}_DJ = f{g,h}_DJ + g{f,h}_DJ + fg R_DJ(h).
std::vector<double> dirac_jacobi_reeb(const DiracData& dd, std::span<const double> x);

}  // namespace cmech
