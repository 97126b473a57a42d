#pragma once

// Exact quantum machinery of the driven three-level Lambda system:
// Hamiltonian, jump operators, Lindblad generator, steady state,
// non-Hermitian propagation and two-time photon correlations.
//
// Basis ordering is {|0>, |1>, |2>} with |2> the excited state. All rates and
// detunings are in units of the decay rate Gamma unless LambdaParams::gamma
// is set to something other than 1.

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "darksearch/errors.hpp"

namespace darksearch::quantum {

using Complex = std::complex<double>;
using Operator3 = Eigen::Matrix3cd;
using StateVector = Eigen::Vector3cd;
/// Lindblad generator acting on column-stacked 3x3 operators.
using Superoperator = Eigen::Matrix<Complex, 9, 9>;
using VecOperator = Eigen::Matrix<Complex, 9, 1>;

struct LambdaParams {
    double rabi = 0.0;
    double gamma = 1.0;
    double detuning = 0.0;

    /// Throws InvalidArgument unless gamma > 0, rabi >= 0 and all fields are finite.
    void validate() const;

    [[nodiscard]] LambdaParams with_detuning(double delta) const {
        LambdaParams out = *this;
        out.detuning = delta;
        return out;
    }
};

class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(Operator3 m) : m_(std::move(m)) {}

    [[nodiscard]] const Operator3& matrix() const { return m_; }
    [[nodiscard]] double population(int level) const { return m_(level, level).real(); }
    [[nodiscard]] double trace() const { return m_.trace().real(); }
    [[nodiscard]] double min_eigenvalue() const;
    /// Hermitian, unit trace and positive semidefinite within the given tolerances.
    [[nodiscard]] bool is_physical(double herm_tol = 1e-12, double eig_tol = 1e-10) const;

private:
    Operator3 m_ = Operator3::Zero();
};

class PureState {
public:
    PureState() = default;
    explicit PureState(StateVector amplitudes, bool normalized = true)
        : amp_(std::move(amplitudes)), normalized_(normalized) {}

    static PureState basis(int level);
    /// (|0> - |1>)/sqrt(2): annihilated by the drive at two-photon resonance.
    static PureState dark();
    /// (|0> + |1>)/sqrt(2).
    static PureState bright();

    [[nodiscard]] const StateVector& amplitudes() const { return amp_; }
    [[nodiscard]] bool normalized() const { return normalized_; }
    [[nodiscard]] double norm_squared() const { return amp_.squaredNorm(); }
    [[nodiscard]] PureState normalized_copy() const;

private:
    StateVector amp_ = StateVector::Zero();
    bool normalized_ = true;
};

/// Thrown when the Liouvillian kernel is not one-dimensional at the working
/// tolerance. Carries the dark-state projector, the attracting state at
/// two-photon resonance.
class DegenerateSteadyState : public NumericalError {
public:
    DegenerateSteadyState(const std::string& what, DensityMatrix dark_projector)
        : NumericalError(what), dark_(std::move(dark_projector)) {}
    [[nodiscard]] const DensityMatrix& dark_projector() const { return dark_; }

private:
    DensityMatrix dark_;
};

// ---- operators --------------------------------------------------------------

[[nodiscard]] Operator3 hamiltonian(const LambdaParams& p);
/// c0 = sqrt(gamma/2)|0><2|, c1 = sqrt(gamma/2)|1><2|.
[[nodiscard]] std::array<Operator3, 2> jump_operators(double gamma);
/// H - (i/2) sum_i c_i^dag c_i.
[[nodiscard]] Operator3 effective_hamiltonian(const LambdaParams& p);

// ---- Liouvillian ------------------------------------------------------------

/// Column-stacking: vec(X)[i + 3*j] = X(i, j), so vec(A X B) = (B^T kron A) vec(X).
[[nodiscard]] VecOperator vectorize(const Operator3& x);
[[nodiscard]] Operator3 unvectorize(const VecOperator& v);
[[nodiscard]] Superoperator liouvillian(const LambdaParams& p);
[[nodiscard]] Operator3 apply_liouvillian(const LambdaParams& p, const Operator3& rho);

/// Second-smallest singular value of L below this marks a degenerate kernel.
inline constexpr double kKernelDegeneracyThreshold = 1e-8;

[[nodiscard]] DensityMatrix dark_state_projector();
/// Unique kernel of L with unit trace; throws DegenerateSteadyState otherwise.
[[nodiscard]] DensityMatrix steady_state(const LambdaParams& p);
/// R~(delta) = sum_i Tr{c_i^dag c_i rho_st} = gamma * <2|rho_st|2>.
[[nodiscard]] double mean_fluorescence_rate(const LambdaParams& p);
[[nodiscard]] double mean_fluorescence_rate(const LambdaParams& p, const DensityMatrix& rho_st);

/// exp(L t) via the eigendecomposition of the 9x9 generator, built once per
/// parameter set.
class LiouvillianPropagator {
public:
    explicit LiouvillianPropagator(const LambdaParams& p);

    [[nodiscard]] Operator3 evolve(const Operator3& x, double t) const;
    [[nodiscard]] const Eigen::Matrix<Complex, 9, 1>& eigenvalues() const { return lambda_; }
    /// Smallest |Re lambda| among the non-stationary modes.
    [[nodiscard]] double spectral_gap() const;

private:
    Eigen::Matrix<Complex, 9, 1> lambda_;
    Superoperator vecs_;
    Superoperator inv_;
};

/// G_i^(2)(tau) = Tr{c_i^dag c_i exp(L tau)[c_i rho_st c_i^dag]}.
[[nodiscard]] double g2_correlation(const LambdaParams& p, int channel, double tau);

/// int_0^inf [G_i^(2)(tau) - Tr{c_i^dag c_i rho_st}^2] dtau from a single
/// linear solve on the traceless subspace. Throws SingularLiouvillian if the
/// kernel of L is not isolated.
[[nodiscard]] double g2_residual_integral(const LambdaParams& p, int channel);

struct CountingMoments {
    DensityMatrix rho_st;
    std::array<double, 2> channel_rate{};       ///< Tr{c_i^dag c_i rho_st}
    std::array<double, 2> residual_integral{};  ///< as g2_residual_integral
};

/// Steady state and both residual integrals from one factorization of L.
[[nodiscard]] CountingMoments counting_moments(const LambdaParams& p);

// ---- non-Hermitian propagation ------------------------------------------------

/// exp(-i H_eff t) from the eigendecomposition of H_eff. Falls back to a
/// scaled Taylor exponential when H_eff is numerically defective.
class EffectivePropagator {
public:
    explicit EffectivePropagator(const LambdaParams& p);

    [[nodiscard]] bool diagonalizable() const { return diagonalizable_; }
    [[nodiscard]] const Eigen::Vector3cd& eigenvalues() const { return lambda_; }
    /// Decay rates -2 Im(lambda_j), same order as eigenvalues().
    [[nodiscard]] Eigen::Vector3d decay_rates() const;
    [[nodiscard]] const Operator3& eigenvectors() const { return vecs_; }

    [[nodiscard]] StateVector propagate(const StateVector& psi0, double t) const;

    /// Expansion of a fixed initial state on the eigenmodes; norm(t) is then a
    /// closed-form sum of decaying exponentials.
    class Expansion {
    public:
        [[nodiscard]] StateVector state(double t) const;
        [[nodiscard]] double norm_squared(double t) const;

    private:
        friend class EffectivePropagator;
        const EffectivePropagator* owner_ = nullptr;
        StateVector coeffs_;
        StateVector psi0_;
    };

    [[nodiscard]] Expansion expand(const StateVector& psi0) const;

private:
    Operator3 heff_;
    Eigen::Vector3cd lambda_;
    Operator3 vecs_;
    Operator3 inv_;
    bool diagonalizable_ = true;
};

/// |psi~(t)> = exp(-i H_eff t)|psi(0)>, left unnormalized.
[[nodiscard]] PureState propagate_nonunitary(const PureState& state, const LambdaParams& p, double t);

/// exp(A) by scaling and squaring of a truncated Taylor series.
[[nodiscard]] Operator3 expm_taylor(const Operator3& a);

}  // namespace darksearch::quantum
