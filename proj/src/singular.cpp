#include "cmech/singular.hpp"

#include <algorithm>
#include <cmath>

namespace cmech {

namespace {

/// Deepest dual level at which a batch may still differentiate the earlier batches.
constexpr int kLadderDepth = 4;

template <class T, class F>
Matrix<T> jac_any(F&& f, std::span<const T> x) {
    std::vector<Dual<T>> xd(x.begin(), x.end());
    Matrix<T> j;
    for (std::size_t k = 0; k < x.size(); ++k) {
        xd[k].eps = T(1.0);
        auto y = f(std::span<const Dual<T>>(xd));
        xd[k].eps = T(0.0);
        if (k == 0) j = Matrix<T>(y.size(), x.size());
        for (std::size_t i = 0; i < y.size(); ++i) j(i, k) = y[i].eps;
    }
    return j;
}

template <class T, class F>
std::vector<T> grad_any(F&& f, std::span<const T> x) {
    std::vector<Dual<T>> xd(x.begin(), x.end());
    std::vector<T> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        xd[k].eps = T(1.0);
        g[k] = f(std::span<const Dual<T>>(xd)).eps;
        xd[k].eps = T(0.0);
    }
    return g;
}

}  // namespace

// ==================== templated evaluators ====================

struct PrecontactSystem::Access {
    template <class T>
    static std::vector<T> eta(const PrecontactSystem& s, std::span<const T> x) {
        if (s.kind_ == Kind::lagrangian) return s.lagrangian_->eta(x);
        std::vector<T> e(s.dim());
        for (std::size_t k = 0; k < e.size(); ++k) e[k] = s.eta_[k].eval(x);
        return e;
    }

    template <class T>
    static T hamiltonian(const PrecontactSystem& s, std::span<const T> x) {
        if (s.kind_ == Kind::lagrangian) return s.lagrangian_->energy(x);
        return s.H_.eval(x);
    }

    template <class T>
    static Matrix<T> flat_bar(const PrecontactSystem& s, std::span<const T> x) {
        auto e = eta(s, x);
        auto J = jac_any([&](auto y) { return eta(s, y); }, x);  // J(k, j) = ∂_j η_k
        const std::size_t d = s.dim();
        Matrix<T> F(d, d);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t j = 0; j < d; ++j) F(k, j) = (J(k, j) - J(j, k)) + e[k] * e[j];
        return F;
    }

    template <class T>
    static std::vector<T> reeb(const PrecontactSystem& s, std::span<const T> x) {
        auto F = flat_bar(s, x);
        auto e = eta(s, x);
        auto K = kernel_projector(F);
        auto A = transpose(F) * F + K;
        auto r = lu_solve(A, transpose_times(F, std::span<const T>(e)));
        if (!s.reeb_shift_.empty()) {
            auto c = lift<T>(s.reeb_shift_);
            auto kc = K * c;
            for (std::size_t i = 0; i < r.size(); ++i) r[i] += kc[i];
        }
        return r;
    }

    template <class T>
    static std::vector<T> gamma_h(const PrecontactSystem& s, std::span<const T> x) {
        auto dH = grad_any([&](auto y) { return hamiltonian(s, y); }, x);
        auto e = eta(s, x);
        auto r = reeb(s, x);
        T c = hamiltonian(s, x) + dot(dH, r);
        for (std::size_t i = 0; i < dH.size(); ++i) dH[i] -= c * e[i];
        return dH;
    }

    template <class T>
    static std::vector<T> stacked(const PrecontactSystem& s, std::size_t k, std::span<const T> x) {
        std::vector<T> out;
        for (std::size_t i = 1; i <= k; ++i) {
            auto b = batch(s, i, x);
            out.insert(out.end(), b.begin(), b.end());
        }
        return out;
    }

    template <class T>
    static std::vector<T> batch(const PrecontactSystem& s, std::size_t k, std::span<const T> x) {
        Matrix<T> A = transpose(flat_bar(s, x));
        if (k > 1) {
            if constexpr (dual_depth_v<T> >= kLadderDepth) {
                throw DerivativeDepthExceeded("constraint ladder exceeds the derivative depth");
            } else {
                auto N = jac_any([&](auto y) { return stacked(s, k - 1, y); }, x);
                A = kernel_projector(N) * A;
            }
        }
        auto g = gamma_h(s, x);
        return kernel_projector(A) * g;
    }
};

using Access = PrecontactSystem::Access;

// ==================== precontact systems ====================

PrecontactSystem PrecontactSystem::darboux(std::size_t r, std::size_t s, const std::string& H) {
    PrecontactSystem sys;
    sys.kind_ = Kind::darboux;
    sys.chart_ = Chart::precontact(r, s);
    sys.r_ = r;
    const auto& names = sys.chart_.names();
    for (std::size_t i = 0; i < sys.chart_.dim(); ++i) {
        std::string c = "0";
        if (i < r) c = "-" + names[r + i];
        else if (i == 2 * r) c = "1";
        sys.eta_.push_back(parse(c, names));
    }
    sys.H_ = parse(H, names);
    return sys;
}

PrecontactSystem PrecontactSystem::from_form(const Chart& chart, const std::vector<std::string>& eta,
                                             const std::string& H) {
    if (eta.size() != chart.dim()) throw ConfigError("eta", "one component per chart coordinate");
    PrecontactSystem sys;
    sys.kind_ = Kind::form;
    sys.chart_ = chart;
    for (const auto& c : eta) sys.eta_.push_back(parse(c, chart.names()));
    sys.H_ = parse(H, chart.names());
    return sys;
}

PrecontactSystem PrecontactSystem::from_lagrangian(const LagrangianSystem& l) {
    PrecontactSystem sys;
    sys.kind_ = Kind::lagrangian;
    sys.chart_ = l.chart();
    sys.lagrangian_ = l;
    return sys;
}

PrecontactSystem PrecontactSystem::with_reeb_shift(std::vector<double> c) const {
    if (c.size() != dim()) throw ConfigError("reeb_shift", "one component per chart coordinate");
    PrecontactSystem out = *this;
    out.reeb_shift_ = std::move(c);
    return out;
}

std::vector<double> PrecontactSystem::eta(std::span<const double> x) const { return Access::eta(*this, x); }
double PrecontactSystem::hamiltonian(std::span<const double> x) const { return Access::hamiltonian(*this, x); }
Matrix<double> PrecontactSystem::flat_bar(std::span<const double> x) const { return Access::flat_bar(*this, x); }
std::vector<double> PrecontactSystem::reeb(std::span<const double> x) const { return Access::reeb(*this, x); }
std::vector<double> PrecontactSystem::gamma_h(std::span<const double> x) const { return Access::gamma_h(*this, x); }

PrecontactClass precontact_class(const PrecontactSystem& sys, std::span<const double> x) {
    auto sv = singular_values(sys.flat_bar(x));
    const double thr = sv.empty() ? 0.0 : 1e-9 * sv.front();
    std::size_t rank = 0;
    for (double s : sv) {
        if (s > thr / 100.0 && s < thr * 100.0) throw BoundaryRank("singular value near the rank threshold");
        if (s > thr) ++rank;
    }
    if (rank % 2 == 0) throw Error("even rank of the flat map; not a precontact form");
    PrecontactClass c;
    c.r = (rank - 1) / 2;
    c.s = sys.dim() - rank;
    if (sys.lagrangian()) c.hessian_rank = numerical_rank(sys.lagrangian()->W(x));
    return c;
}

std::vector<std::vector<double>> characteristic_kernel(const PrecontactSystem& sys, std::span<const double> x) {
    return null_space(sys.flat_bar(x));
}

std::vector<std::vector<double>> perp(const PrecontactSystem& sys, const std::vector<std::vector<double>>& basis,
                                      std::span<const double> x) {
    auto F = sys.flat_bar(x);
    Matrix<double> M(basis.size(), sys.dim());
    for (std::size_t i = 0; i < basis.size(); ++i) M.set_row(i, std::span<const double>(F * basis[i]));
    return null_space(M);
}

// ==================== constraint algorithm ====================

std::vector<double> ConstraintLadder::batch(std::size_t k, std::span<const double> x) const {
    return Access::batch(sys_, k, x);
}

std::vector<double> ConstraintLadder::constraints(std::size_t k, std::span<const double> x) const {
    return Access::stacked(sys_, k, x);
}

Matrix<double> ConstraintLadder::constraint_jacobian(std::size_t k, std::span<const double> x) const {
    if (k == 0) return Matrix<double>(0, sys_.dim());
    return jac_any([&](auto y) { return Access::stacked(sys_, k, y); }, x);
}

std::optional<std::vector<double>> ConstraintLadder::project(std::size_t k, std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    if (k == 0) return y;
    try {
        for (int it = 0; it <= 30; ++it) {
            auto g = constraints(k, y);
            if (max_abs(g) < 1e-10) return y;
            if (it == 30) break;
            auto dy = pseudo_solve(constraint_jacobian(k, y), g);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= dy[i];
        }
    } catch (const SingularSystem&) {
    }
    return std::nullopt;
}

bool constraint_step(ConstraintLadder& ladder) {
    const std::size_t k = ladder.size() + 1;
    double top = 0.0;
    for (const auto& p : ladder.probes()) top = std::max(top, max_abs(ladder.batch(k, p)));
    if (top <= 1e-8) return false;

    Points next;
    for (const auto& p : ladder.probes())
        if (auto y = ladder.project(k, p)) next.push_back(std::move(*y));
    if (next.empty()) throw EmptyFinalManifold("no probe satisfies the constraints of step " + std::to_string(k));

    std::optional<std::size_t> rank, prev;
    for (const auto& y : next) {
        const std::size_t rk = numerical_rank(ladder.constraint_jacobian(k, y), 1e-7);
        const std::size_t rp = numerical_rank(ladder.constraint_jacobian(k - 1, y), 1e-7);
        if ((rank && *rank != rk) || (prev && *prev != rp))
            throw RankUnstable("constraint rank varies across probes at step " + std::to_string(k));
        rank = rk;
        prev = rp;
    }
    LadderStep step;
    step.generators = ladder.system().dim();
    step.rank = *rank - std::min(*rank, *prev);
    step.dimension = ladder.system().dim() - *rank;
    step.max_value = top;
    step.probes = next.size();
    ladder.push(step, std::move(next));
    return true;
}

ConstraintLadder run_algorithm(const PrecontactSystem& sys, std::size_t max_iters, std::uint64_t seed) {
    ConstraintLadder ladder(sys);
    ladder.set_probes(halton_points(sys.dim(), 64, seed));
    try {
        for (std::size_t it = 0; it < max_iters; ++it)
            if (!constraint_step(ladder)) return ladder;
    } catch (const DerivativeDepthExceeded&) {
        throw NoConvergence("constraint algorithm deeper than the derivative budget");
    }
    throw NoConvergence("constraint algorithm did not stabilise within " + std::to_string(max_iters) + " steps");
}

// ==================== Dirac–Jacobi ====================

DiracData::DiracData(JacobiStructure j, std::vector<ScalarField> constraints, std::vector<std::size_t> second,
                     std::vector<std::size_t> first)
    : j_(std::move(j)), phi_(std::move(constraints)), second_(std::move(second)), first_(std::move(first)) {}

Matrix<double> DiracData::C(std::span<const double> x) const {
    const std::size_t m = second_.size();
    Matrix<double> c(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) c(a, b) = jacobi_bracket(j_, phi_[second_[a]], phi_[second_[b]], x);
    return c;
}

std::vector<ScalarField> DiracData::first_class_fields() const {
    std::vector<ScalarField> out;
    for (std::size_t fa : first_) {
        auto j = j_;
        auto phi = phi_;
        auto second = second_;
        out.emplace_back(j_.contact().dim(), 1, [j, phi, second, fa](auto x) {
            using T = typename decltype(x)::value_type;
            const std::size_t m = second.size();
            T val = phi[fa](x);
            if (m == 0) return val;
            Matrix<T> c(m, m);
            std::vector<T> g(m);
            for (std::size_t a = 0; a < m; ++a) {
                g[a] = jacobi_bracket(j, phi[fa], phi[second[a]], x);
                for (std::size_t b = 0; b < m; ++b) c(a, b) = jacobi_bracket(j, phi[second[a]], phi[second[b]], x);
            }
            auto B = lu_solve(transpose(c), g);
            for (std::size_t a = 0; a < m; ++a) val -= B[a] * phi[second[a]](x);
            return val;
        });
    }
    return out;
}

Points project_onto(const std::vector<ScalarField>& constraints, const Points& points) {
    Points out;
    if (constraints.empty()) return points;
    const std::size_t m = constraints.size();
    for (const auto& p : points) {
        std::vector<double> y = p;
        for (int it = 0; it <= 30; ++it) {
            std::vector<double> g(m);
            for (std::size_t a = 0; a < m; ++a) g[a] = constraints[a](y);
            if (max_abs(g) < 1e-10) {
                out.push_back(y);
                break;
            }
            if (it == 30) break;
            Matrix<double> J(m, y.size());
            for (std::size_t a = 0; a < m; ++a) J.set_row(a, std::span<const double>(gradient(constraints[a], y)));
            auto dy = pseudo_solve(J, g);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= dy[i];
        }
    }
    return out;
}

DiracData classify_constraints(const std::vector<ScalarField>& constraints, const JacobiStructure& j,
                               const Points& probes) {
    const std::size_t dim = j.contact().dim();
    Points pts = probes.empty() ? project_onto(constraints, random_points(dim, 20)) : probes;
    if (pts.empty()) throw EmptyFinalManifold("constraints have no common zero among the probes");
    const std::size_t m = constraints.size();
    std::optional<std::size_t> rank;
    Matrix<double> G0;
    for (const auto& p : pts) {
        Matrix<double> G(m, m);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                G(a, b) = jacobi_bracket(j, constraints[a], constraints[b], std::span<const double>(p));
        const std::size_t rk = numerical_rank(G, 1e-7);
        if (rank && *rank != rk) throw RankUnstable("Gram matrix rank varies across probes");
        if (!rank) G0 = G;
        rank = rk;
    }
    std::vector<std::size_t> second = *rank == 0 ? std::vector<std::size_t>{} : independent_rows(G0, 1e-7);
    std::vector<std::size_t> first;
    for (std::size_t a = 0; a < m; ++a)
        if (std::find(second.begin(), second.end(), a) == second.end()) first.push_back(a);

    DiracData dd(j, constraints, second, first);
    dd.gram_rank = *rank;
    dd.probes = pts;
    auto bar = dd.first_class_fields();
    for (const auto& p : pts)
        for (const auto& f : bar)
            for (const auto& phi : constraints)
                dd.first_class_residual = std::max(
                    dd.first_class_residual, std::abs(jacobi_bracket(j, f, phi, std::span<const double>(p))));
    return dd;
}

namespace {

Matrix<double> checked_C(const DiracData& dd, std::span<const double> x) {
    auto c = dd.C(x);
    if (std::abs(determinant(c)) < 1e-12) throw SingularCMatrix("second-class Gram block is singular");
    return c;
}

}  // namespace

double dirac_jacobi_bracket(const DiracData& dd, const ScalarField& f, const ScalarField& g,
                            std::span<const double> x) {
    const auto& j = dd.jacobi();
    double out = jacobi_bracket(j, f, g, x);
    const auto& second = dd.second_class();
    if (second.empty()) return out;
    auto c = checked_C(dd, x);
    std::vector<double> fb(second.size()), bg(second.size());
    for (std::size_t a = 0; a < second.size(); ++a) {
        fb[a] = jacobi_bracket(j, f, dd.constraints()[second[a]], x);
        bg[a] = jacobi_bracket(j, dd.constraints()[second[a]], g, x);
    }
    return out - dot(fb, lu_solve(c, bg));
}

std::vector<double> dirac_jacobi_reeb(const DiracData& dd, std::span<const double> x) {
    const auto& j = dd.jacobi();
    auto R = j.contact().reeb(x);
    const auto& second = dd.second_class();
    if (second.empty()) return R;
    auto c = checked_C(dd, x);
    std::vector<double> rphi(second.size());
    for (std::size_t a = 0; a < second.size(); ++a)
        rphi[a] = dot(gradient(dd.constraints()[second[a]], x), R);
    auto w = lu_solve(transpose(c), rphi);  // w_b = C_ab R(φ^a)
    auto out = R;
    for (std::size_t b = 0; b < second.size(); ++b) {
        const auto& phi = dd.constraints()[second[b]];
        auto dphi = gradient(phi, x);
        auto X = j.sharp_lambda(std::span<const double>(dphi), x);
        const double v = phi(x);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= w[b] * (X[i] - v * R[i]);
    }
    return out;
}

}  // namespace cmech
