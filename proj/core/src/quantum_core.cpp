#include "darksearch/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace darksearch::quantum {

namespace {

constexpr Complex kI{0.0, 1.0};

Superoperator kron(const Operator3& a, const Operator3& b) {
    Superoperator out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
    return out;
}

/// Row vector r with r * vec(X) = Tr(X).
Eigen::Matrix<Complex, 1, 9> trace_row() {
    Eigen::Matrix<Complex, 1, 9> r = Eigen::Matrix<Complex, 1, 9>::Zero();
    r(0) = r(4) = r(8) = 1.0;
    return r;
}

void check_channel(int channel) {
    if (channel != 0 && channel != 1)
        throw InvalidArgument("channel must be 0 or 1, got " + std::to_string(channel));
}

/// Singular values of L in decreasing order.
Eigen::Matrix<double, 9, 1> singular_values(const Superoperator& l) {
    Eigen::JacobiSVD<Superoperator> svd(l);
    return svd.singularValues();
}

/// L plus its second-smallest singular value and a QR factorization of the
/// trace-augmented system [L; Tr], shared by every solve at one parameter set.
class KernelSolver {
public:
    explicit KernelSolver(const LambdaParams& p) : l_(liouvillian(p)) {
        gap_ = singular_values(l_)(7);
        Eigen::Matrix<Complex, 10, 9> a;
        a.topRows<9>() = l_;
        a.row(9) = trace_row();
        qr_.compute(a);
    }

    [[nodiscard]] bool degenerate(double gamma) const { return gap_ < kKernelDegeneracyThreshold * gamma; }
    [[nodiscard]] double gap() const { return gap_; }

    [[nodiscard]] VecOperator solve(const VecOperator& rhs, Complex trace) const {
        Eigen::Matrix<Complex, 10, 1> b;
        b.head<9>() = rhs;
        b(9) = trace;
        return qr_.solve(b);
    }

    [[nodiscard]] DensityMatrix steady() const {
        Operator3 rho = unvectorize(solve(VecOperator::Zero(), 1.0));
        rho = 0.5 * (rho + rho.adjoint());
        rho /= rho.trace();
        return DensityMatrix(rho);
    }

private:
    Superoperator l_;
    double gap_ = 0.0;
    Eigen::ColPivHouseholderQR<Eigen::Matrix<Complex, 10, 9>> qr_;
};

[[noreturn]] void throw_degenerate(const LambdaParams& p, double gap) {
    throw DegenerateSteadyState("steady_state: Liouvillian kernel is degenerate at detuning " +
                                    std::to_string(p.detuning) + " (second-smallest singular value " +
                                    std::to_string(gap) + ")",
                                dark_state_projector());
}

/// X with L X = -(c rho c^dag - R_i rho), Tr X = 0, contracted with c^dag c.
double residual_integral(const KernelSolver& solver, const Operator3& c, const Operator3& rho) {
    const Operator3 n = c.adjoint() * c;
    const double rate_i = (n * rho).trace().real();
    const Operator3 y = c * rho * c.adjoint() - rate_i * rho;
    const VecOperator x = solver.solve(-vectorize(y), 0.0);
    return (n * unvectorize(x)).trace().real();
}

}  // namespace

void LambdaParams::validate() const {
    if (!std::isfinite(rabi) || !std::isfinite(gamma) || !std::isfinite(detuning))
        throw InvalidArgument("LambdaParams: non-finite field");
    if (!(gamma > 0.0)) throw InvalidArgument("LambdaParams: gamma must be positive");
    if (rabi < 0.0) throw InvalidArgument("LambdaParams: rabi must be non-negative");
}

double DensityMatrix::min_eigenvalue() const {
    const Operator3 h = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator3> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool DensityMatrix::is_physical(double herm_tol, double eig_tol) const {
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > herm_tol) return false;
    if (std::abs(m_.trace() - Complex(1.0)) > herm_tol) return false;
    return min_eigenvalue() >= -eig_tol;
}

PureState PureState::basis(int level) {
    if (level < 0 || level > 2) throw InvalidArgument("basis level must be 0, 1 or 2");
    StateVector v = StateVector::Zero();
    v(level) = 1.0;
    return PureState(v);
}

PureState PureState::dark() {
    const double s = 1.0 / std::sqrt(2.0);
    return PureState(StateVector(s, -s, 0.0));
}

PureState PureState::bright() {
    const double s = 1.0 / std::sqrt(2.0);
    return PureState(StateVector(s, s, 0.0));
}

PureState PureState::normalized_copy() const {
    const double n = amp_.norm();
    if (!(n > 0.0)) throw NumericalError("cannot normalize a null state");
    return PureState(amp_ / n, true);
}

Operator3 hamiltonian(const LambdaParams& p) {
    Operator3 h = Operator3::Zero();
    const double half = 0.5 * p.rabi;
    h(0, 0) = p.detuning;
    h(2, 0) = h(0, 2) = half;
    h(2, 1) = h(1, 2) = half;
    return h;
}

std::array<Operator3, 2> jump_operators(double gamma) {
    if (!(gamma > 0.0)) throw InvalidArgument("jump_operators: gamma must be positive");
    const double amp = std::sqrt(0.5 * gamma);
    Operator3 c0 = Operator3::Zero();
    Operator3 c1 = Operator3::Zero();
    c0(0, 2) = amp;
    c1(1, 2) = amp;
    return {c0, c1};
}

Operator3 effective_hamiltonian(const LambdaParams& p) {
    Operator3 h = hamiltonian(p);
    for (const auto& c : jump_operators(p.gamma)) h -= 0.5 * kI * (c.adjoint() * c);
    return h;
}

VecOperator vectorize(const Operator3& x) {
    VecOperator v;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) v(i + 3 * j) = x(i, j);
    return v;
}

Operator3 unvectorize(const VecOperator& v) {
    Operator3 x;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) x(i, j) = v(i + 3 * j);
    return x;
}

Superoperator liouvillian(const LambdaParams& p) {
    p.validate();
    const Operator3 id = Operator3::Identity();
    const Operator3 h = hamiltonian(p);
    Superoperator l = -kI * (kron(id, h) - kron(h.transpose(), id));
    for (const auto& c : jump_operators(p.gamma)) {
        const Operator3 n = c.adjoint() * c;
        l += kron(c.conjugate(), c) - 0.5 * kron(id, n) - 0.5 * kron(n.transpose(), id);
    }
    return l;
}

Operator3 apply_liouvillian(const LambdaParams& p, const Operator3& rho) {
    return unvectorize(liouvillian(p) * vectorize(rho));
}

DensityMatrix dark_state_projector() {
    const StateVector d = PureState::dark().amplitudes();
    return DensityMatrix(d * d.adjoint());
}

DensityMatrix steady_state(const LambdaParams& p) {
    p.validate();
    const KernelSolver solver(p);
    if (solver.degenerate(p.gamma)) throw_degenerate(p, solver.gap());
    return solver.steady();
}

double mean_fluorescence_rate(const LambdaParams& p, const DensityMatrix& rho_st) {
    double r = 0.0;
    for (const auto& c : jump_operators(p.gamma)) r += (c.adjoint() * c * rho_st.matrix()).trace().real();
    return std::max(r, 0.0);
}

double mean_fluorescence_rate(const LambdaParams& p) {
    return mean_fluorescence_rate(p, steady_state(p));
}

LiouvillianPropagator::LiouvillianPropagator(const LambdaParams& p) {
    Eigen::ComplexEigenSolver<Superoperator> es(liouvillian(p));
    if (es.info() != Eigen::Success) throw NumericalError("Liouvillian eigendecomposition failed");
    lambda_ = es.eigenvalues();
    vecs_ = es.eigenvectors();
    Eigen::FullPivLU<Superoperator> lu(vecs_);
    if (!lu.isInvertible() || lu.rcond() < 1e-13)
        throw DefectiveMatrix("Liouvillian is numerically defective at detuning " + std::to_string(p.detuning));
    inv_ = lu.inverse();
}

Operator3 LiouvillianPropagator::evolve(const Operator3& x, double t) const {
    if (t == 0.0) return x;
    VecOperator coeffs = inv_ * vectorize(x);
    for (int k = 0; k < 9; ++k) coeffs(k) *= std::exp(lambda_(k) * t);
    return unvectorize(vecs_ * coeffs);
}

double LiouvillianPropagator::spectral_gap() const {
    std::array<double, 9> re{};
    for (int k = 0; k < 9; ++k) re[k] = std::abs(lambda_(k).real());
    std::sort(re.begin(), re.end());
    return re[1];
}

double g2_correlation(const LambdaParams& p, int channel, double tau) {
    check_channel(channel);
    if (tau < 0.0) throw InvalidArgument("g2_correlation: tau must be non-negative");
    const DensityMatrix rho = steady_state(p);
    const Operator3 c = jump_operators(p.gamma)[channel];
    const Operator3 n = c.adjoint() * c;
    const Operator3 x0 = c * rho.matrix() * c.adjoint();
    if (tau == 0.0) return std::max((n * x0).trace().real(), 0.0);
    const LiouvillianPropagator prop(p);
    return (n * prop.evolve(x0, tau)).trace().real();
}

double g2_residual_integral(const LambdaParams& p, int channel) {
    check_channel(channel);
    return counting_moments(p).residual_integral[static_cast<std::size_t>(channel)];
}

CountingMoments counting_moments(const LambdaParams& p) {
    p.validate();
    const KernelSolver solver(p);
    if (solver.degenerate(p.gamma))
        throw SingularLiouvillian("g2_residual_integral: no spectral gap at detuning " + std::to_string(p.detuning));
    CountingMoments m{solver.steady(), {}, {}};
    const auto cs = jump_operators(p.gamma);
    for (std::size_t i = 0; i < 2; ++i) {
        m.channel_rate[i] = (cs[i].adjoint() * cs[i] * m.rho_st.matrix()).trace().real();
        m.residual_integral[i] = residual_integral(solver, cs[i], m.rho_st.matrix());
    }
    return m;
}

EffectivePropagator::EffectivePropagator(const LambdaParams& p) : heff_(effective_hamiltonian(p)) {
    p.validate();
    Eigen::ComplexEigenSolver<Operator3> es(heff_);
    if (es.info() != Eigen::Success) {
        diagonalizable_ = false;
        return;
    }
    lambda_ = es.eigenvalues();
    vecs_ = es.eigenvectors();
    // Decay rates below the eigensolver's resolution are round-off; a growing mode is impossible.
    const double resolution = 16.0 * std::numeric_limits<double>::epsilon() * heff_.norm();
    for (int j = 0; j < 3; ++j)
        if (lambda_(j).imag() > -resolution) lambda_(j) = Complex(lambda_(j).real(), 0.0);
    Eigen::JacobiSVD<Operator3> svd(vecs_);
    const auto s = svd.singularValues();
    diagonalizable_ = s(2) > 0.0 && s(0) / s(2) < 1e8;
    if (diagonalizable_) inv_ = vecs_.inverse();
}

Eigen::Vector3d EffectivePropagator::decay_rates() const {
    Eigen::Vector3d out;
    for (int j = 0; j < 3; ++j) out(j) = -2.0 * lambda_(j).imag();
    return out;
}

StateVector EffectivePropagator::propagate(const StateVector& psi0, double t) const {
    if (t == 0.0) return psi0;
    if (!diagonalizable_) return expm_taylor(-kI * t * heff_) * psi0;
    StateVector c = inv_ * psi0;
    for (int j = 0; j < 3; ++j) c(j) *= std::exp(-kI * lambda_(j) * t);
    return vecs_ * c;
}

EffectivePropagator::Expansion EffectivePropagator::expand(const StateVector& psi0) const {
    Expansion e;
    e.owner_ = this;
    e.psi0_ = psi0;
    e.coeffs_ = diagonalizable_ ? StateVector(inv_ * psi0) : StateVector::Zero();
    return e;
}

StateVector EffectivePropagator::Expansion::state(double t) const {
    if (!owner_->diagonalizable_) return owner_->propagate(psi0_, t);
    StateVector c = coeffs_;
    for (int j = 0; j < 3; ++j) c(j) *= std::exp(-kI * owner_->lambda_(j) * t);
    return owner_->vecs_ * c;
}

double EffectivePropagator::Expansion::norm_squared(double t) const {
    return state(t).squaredNorm();
}

PureState propagate_nonunitary(const PureState& state, const LambdaParams& p, double t) {
    if (t < 0.0) throw InvalidArgument("propagate_nonunitary: t must be non-negative");
    if (t == 0.0) return PureState(state.amplitudes(), state.normalized());
    const EffectivePropagator prop(p);
    return PureState(prop.propagate(state.amplitudes(), t), false);
}

Operator3 expm_taylor(const Operator3& a) {
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Operator3 scaled = a / std::ldexp(1.0, squarings);
    Operator3 result = Operator3::Identity();
    Operator3 term = Operator3::Identity();
    for (int k = 1; k <= 24; ++k) {
        term = term * scaled / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace darksearch::quantum
