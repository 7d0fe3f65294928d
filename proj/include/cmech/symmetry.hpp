#pragma once

#include <vector>

#include "cmech/herglotz.hpp"

namespace cmech {

// ==================== lifts ====================

enum class LiftKind { vertical, complete };

/// Field Y^i(q) ∂q^i on Q, optionally extended by 𝒵(z) ∂z on Q × R.
/// Components are expressions over the tangent chart (q, v, z) of the target system.
struct BaseField {
    std::vector<Expr> Y;
    Expr Zc;  // empty when the field lives on Q
};

/// Base field from expression strings over the tangent chart names.
BaseField base_field(const Chart& chart, const std::vector<std::string>& Y, const std::string& Zc = "");

/// X^V = Y^i ∂v^i, or X^C = Y^i ∂q^i + v^j ∂_jY^i ∂v^i + 𝒵 ∂z.
/// Throws InadmissibleLift when Y depends on (v, z) or 𝒵 depends on (q, v).
VectorField lift(const BaseField& X, const Chart& chart, LiftKind kind);

// ==================== Noether ====================

struct NoetherReport {
    bool is_symmetry = false;  // residual_a below 1e-10
    double residual_a = 0.0;   // max |X^C(L)|
    double residual_b = 0.0;   // max |ξ_L(f) − (∂L/∂z) f|, f = X^V(L)
};

/// Probes default to 20 seeded points in [-2, 2]^dim.
NoetherReport noether_check(const LagrangianSystem& sys, const BaseField& X, const Points& probes = {});

/// f = X^V(L) = Y^i ∂L/∂v^i.
ScalarField noether_quantity(const LagrangianSystem& sys, const BaseField& X);

/// |−η_L(Ȳ^C) − (Ȳ^V(L) − 𝒵)| at x.
double lie_symmetry_residual(const LagrangianSystem& sys, const BaseField& Y, std::span<const double> x);

/// max_t |f/E_L − (f/E_L)(0)| along a trajectory on the tangent chart.
/// Throws NearZeroEnergy at the first sample with |E_L| <= 1e-6.
double conserved_ratio(const LagrangianSystem& sys, const ScalarField& f, const Trajectory& traj);

// ==================== dynamical and Cartan symmetries ====================

struct DynamicalSymmetryReport {
    double bracket_residual = 0.0;      // max |η([X_H, X])|
    double commutation_residual = 0.0;  // max |{H, f}|, f = −η(X)
    double identity_residual = 0.0;     // max |{H, f} + η([X_H, X])|
};

DynamicalSymmetryReport dynamical_symmetry_residual(const HamiltonianSystem& sys, const VectorField& X,
                                                    const Points& probes = {});

struct CartanReport {
    double residual_1 = 0.0;            // max ‖L_Ỹ η_L − a η_L − dg‖∞
    double residual_2 = 0.0;            // max |Ỹ(E_L) − a E_L − g R_L(E_L)|
    double dissipated_residual = 0.0;   // max |{E_L, η_L(Ỹ) − g}|
};

CartanReport cartan_symmetry_check(const LagrangianSystem& sys, const VectorField& Y, const ScalarField& a,
                                   const ScalarField& g, const Points& probes = {});

/// {E_L, f} = ξ_L(f) + R_L(E_L) f for the Jacobi structure of η_L.
double energy_bracket(const LagrangianSystem& sys, const ScalarField& f, std::span<const double> x);

// ==================== momentum map ====================

/// Infinitesimal generators ξ_M of an action by contactomorphisms.
struct ActionGenerators {
    std::vector<VectorField> fields;
};

struct MomentumReport {
    std::vector<double> values;        // Ĵ_k(x) = −η(ξ_M^(k))(x)
    double field_residual = 0.0;       // max_k ‖X_{Ĵ_k} − ξ_M^(k)‖∞ at x
    double contact_residual = 0.0;     // max ‖L_{ξ_M} η‖∞ over probes
};

/// Ĵ_k as a scalar field.
ScalarField momentum_component(const ContactStructure& s, const VectorField& generator);

/// Throws NotContactomorphism when some generator has ‖L_ξ η‖ > 1e-8 at a probe.
MomentumReport momentum_map(const ActionGenerators& gen, const ContactStructure& s, std::span<const double> x,
                            const Points& probes = {});

}  // namespace cmech
