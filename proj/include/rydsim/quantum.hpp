#pragma once

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rydsim/errors.hpp"

namespace rydsim {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr int kMaxDimension = 16;
inline constexpr double kHermitianTol = 1e-12;

/// Ordered set of named atomic levels; fixes the index convention for all
/// states, Hamiltonians and collapse operators built on top of it.
class LevelBasis {
  public:
    explicit LevelBasis(std::vector<std::string> labels);

    int dimension() const { return static_cast<int>(labels_.size()); }
    const std::vector<std::string>& labels() const { return labels_; }
    int index_of(std::string_view label) const;
    bool operator==(const LevelBasis& other) const { return labels_ == other.labels_; }

  private:
    std::vector<std::string> labels_;
};

struct QuantumState {
    LevelBasis basis;
    CVector amplitudes;

    static QuantumState zero(const LevelBasis& basis);
    static QuantumState basis_state(const LevelBasis& basis, std::string_view label);
    static QuantumState basis_state(const LevelBasis& basis, int index);

    double norm_squared() const { return amplitudes.squaredNorm(); }
    Complex amplitude(std::string_view label) const { return amplitudes(basis.index_of(label)); }
};

struct DensityMatrix {
    LevelBasis basis;
    CMatrix elements;

    static DensityMatrix pure(const QuantumState& psi);

    double trace() const { return elements.trace().real(); }
    double population(std::string_view label) const {
        const int i = basis.index_of(label);
        return elements(i, i).real();
    }
};

/// One piecewise-constant slice of a drive sequence. `matrix` is in angular
/// frequency units (rad/s). `substeps` splits the slice into equal parts for
/// convergence checks; the propagator is exact for constant H, so results are
/// substep-independent to machine precision.
struct HamiltonianSegment {
    CMatrix matrix;
    double duration = 0.0; // s
    int substeps = 1;
};

/// Lindblad jump operator, entries in sqrt(rate) units (s^-1/2).
struct CollapseOperator {
    CMatrix matrix;
    std::string description;
};

/// Throws DimensionError if m deviates from Hermiticity by more than tol
/// relative to its largest entry.
void check_hermitian(const CMatrix& m, double tol, const std::string& what);

QuantumState evolve_state(const QuantumState& state, std::span<const HamiltonianSegment> segments);

DensityMatrix evolve_density(const DensityMatrix& rho, std::span<const HamiltonianSegment> segments,
                             std::span<const CollapseOperator> collapse);

RVector populations(const QuantumState& state);
RVector populations(const DensityMatrix& rho);

double overlap_fidelity(const QuantumState& a, const QuantumState& b);

/// exp(-i H dt) computed once via self-adjoint eigendecomposition; cheap to
/// apply repeatedly on uniform scan grids.
class UnitaryPropagator {
  public:
    UnitaryPropagator(const CMatrix& hamiltonian, double dt);
    void apply(CVector& psi) const { psi = u_ * psi; }
    const CMatrix& matrix() const { return u_; }

  private:
    CMatrix u_;
};

/// Builds the vectorized Lindblad generator: drho/dt = -i[H,rho] + sum_k
/// (L rho L^dag - {L^dag L, rho}/2), column-major vec convention.
CMatrix liouvillian(const CMatrix& hamiltonian, std::span<const CollapseOperator> collapse);

/// exp(L dt) acting on vectorized density matrices.
class LindbladPropagator {
  public:
    LindbladPropagator(const CMatrix& hamiltonian, std::span<const CollapseOperator> collapse, double dt);
    void apply(CMatrix& rho) const;

  private:
    CMatrix exp_l_;
};

/// Kronecker product helper used by the two-atom builders (a acts on the
/// left/first factor).
CMatrix kron(const CMatrix& a, const CMatrix& b);

} // namespace rydsim
