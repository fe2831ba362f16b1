#include "rydsim/quantum.hpp"

#include <algorithm>
#include <unordered_set>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace rydsim {

LevelBasis::LevelBasis(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty())
        throw ValidationError("LevelBasis: no labels given");
    if (static_cast<int>(labels_.size()) > kMaxDimension)
        throw ValidationError("LevelBasis: dimension " + std::to_string(labels_.size()) +
                              " exceeds limit of " + std::to_string(kMaxDimension));
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_)
        if (!seen.insert(l).second)
            throw ValidationError("LevelBasis: duplicate label '" + l + "'");
}

int LevelBasis::index_of(std::string_view label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end())
        throw ValidationError("LevelBasis: unknown label '" + std::string(label) + "'");
    return static_cast<int>(it - labels_.begin());
}

QuantumState QuantumState::zero(const LevelBasis& basis) {
    return {basis, CVector::Zero(basis.dimension())};
}

QuantumState QuantumState::basis_state(const LevelBasis& basis, std::string_view label) {
    return basis_state(basis, basis.index_of(label));
}

QuantumState QuantumState::basis_state(const LevelBasis& basis, int index) {
    QuantumState s = zero(basis);
    s.amplitudes(index) = 1.0;
    return s;
}

DensityMatrix DensityMatrix::pure(const QuantumState& psi) {
    return {psi.basis, psi.amplitudes * psi.amplitudes.adjoint()};
}

void check_hermitian(const CMatrix& m, double tol, const std::string& what) {
    if (m.rows() != m.cols())
        throw DimensionError(what + ": matrix is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > tol * scale)
        throw DimensionError(what + ": matrix is not Hermitian (deviation " + std::to_string(dev) + ")");
}

namespace {

void check_segment(const HamiltonianSegment& seg, int dim) {
    if (seg.matrix.rows() != dim || seg.matrix.cols() != dim)
        throw DimensionError("evolve: segment dimension " + std::to_string(seg.matrix.rows()) +
                             " does not match state dimension " + std::to_string(dim));
    check_hermitian(seg.matrix, kHermitianTol, "evolve: segment");
    if (seg.duration < 0.0)
        throw ValidationError("evolve: negative segment duration");
    if (seg.substeps < 1)
        throw ValidationError("evolve: substeps must be >= 1");
}

} // namespace

QuantumState evolve_state(const QuantumState& state, std::span<const HamiltonianSegment> segments) {
    const int dim = state.basis.dimension();
    QuantumState out = state;
    for (const auto& seg : segments) {
        check_segment(seg, dim);
        if (seg.duration == 0.0)
            continue;
        UnitaryPropagator step(seg.matrix, seg.duration / seg.substeps);
        for (int k = 0; k < seg.substeps; ++k)
            step.apply(out.amplitudes);
    }
    return out;
}

DensityMatrix evolve_density(const DensityMatrix& rho, std::span<const HamiltonianSegment> segments,
                             std::span<const CollapseOperator> collapse) {
    const int dim = rho.basis.dimension();
    if (rho.elements.rows() != dim || rho.elements.cols() != dim)
        throw DimensionError("evolve_density: density matrix does not match basis dimension");
    check_hermitian(rho.elements, 1e-9, "evolve_density: input rho");
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.elements, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-9)
            throw ValidationError("evolve_density: input rho is not positive semidefinite");
    }
    for (const auto& c : collapse)
        if (c.matrix.rows() != dim || c.matrix.cols() != dim)
            throw DimensionError("evolve_density: collapse operator dimension mismatch");

    DensityMatrix out = rho;
    for (const auto& seg : segments) {
        check_segment(seg, dim);
        if (seg.duration == 0.0)
            continue;
        LindbladPropagator step(seg.matrix, collapse, seg.duration / seg.substeps);
        for (int k = 0; k < seg.substeps; ++k)
            step.apply(out.elements);
    }
    // Re-symmetrize to wash out the O(1e-15) drift of the Pade exponential.
    out.elements = 0.5 * (out.elements + out.elements.adjoint().eval());
    return out;
}

RVector populations(const QuantumState& state) {
    return state.amplitudes.cwiseAbs2();
}

RVector populations(const DensityMatrix& rho) {
    RVector p = rho.elements.diagonal().real();
    for (int i = 0; i < p.size(); ++i)
        if (p(i) < 0.0 && p(i) > -1e-9)
            p(i) = 0.0;
    return p;
}

double overlap_fidelity(const QuantumState& a, const QuantumState& b) {
    if (!(a.basis == b.basis))
        throw DimensionError("overlap_fidelity: states live in different bases");
    return std::norm(a.amplitudes.dot(b.amplitudes));
}

UnitaryPropagator::UnitaryPropagator(const CMatrix& hamiltonian, double dt) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hamiltonian);
    if (es.info() != Eigen::Success)
        throw NumericalError("UnitaryPropagator: eigendecomposition failed");
    const auto& v = es.eigenvectors();
    CVector phases(hamiltonian.rows());
    for (int i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(Complex(0.0, -es.eigenvalues()(i) * dt));
    u_ = v * phases.asDiagonal() * v.adjoint();
}

CMatrix liouvillian(const CMatrix& hamiltonian, std::span<const CollapseOperator> collapse) {
    const auto dim = hamiltonian.rows();
    const CMatrix id = CMatrix::Identity(dim, dim);
    const Complex i_unit(0.0, 1.0);
    CMatrix l = -i_unit * (kroneckerProduct(id, hamiltonian).eval() -
                           kroneckerProduct(hamiltonian.transpose(), id).eval());
    for (const auto& c : collapse) {
        const CMatrix cdc = c.matrix.adjoint() * c.matrix;
        l += kroneckerProduct(c.matrix.conjugate(), c.matrix).eval();
        l -= 0.5 * kroneckerProduct(id, cdc).eval();
        l -= 0.5 * kroneckerProduct(cdc.transpose(), id).eval();
    }
    return l;
}

LindbladPropagator::LindbladPropagator(const CMatrix& hamiltonian, std::span<const CollapseOperator> collapse,
                                       double dt) {
    exp_l_ = (liouvillian(hamiltonian, collapse) * dt).exp();
}

void LindbladPropagator::apply(CMatrix& rho) const {
    const auto dim = rho.rows();
    Eigen::Map<CVector> vec(rho.data(), dim * dim);
    vec = (exp_l_ * vec).eval();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    return kroneckerProduct(a, b);
}

} // namespace rydsim
