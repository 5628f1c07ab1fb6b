#pragma once

#include "qlat/embed.hpp"
#include "qlat/lattice.hpp"

namespace qlat {

struct SpinorNorms {
    SCSubgroup theta_O;
    SCSubgroup theta_O_plus;
};

/// Spinor norm groups theta(O(V)), theta(O+(V)) of a quadratic space.
SpinorNorms theta_space(const QuadSpace& V);

/// Kneser's formula for the integral spinor norm groups of a lattice,
/// assembled from its Jordan components and their norm generator classes.
SpinorNorms kneser_spinor_norms(const QuadLattice& M);

struct TransporterNorms {
    SCSubgroup theta_X;
    SCSubgroup theta_X_plus;
    std::vector<std::string> trace;
};

/// Checks that the columns of `inj` span a non-degenerate sublattice of M
/// (ring entries); returns the sublattice Gram inj^t G inj.
QuadLattice sublattice_of(const QuadLattice& M, const Mat& inj);

/// theta(X(M/N)) and theta(X+(M/N)) via the scale-climbing reduction:
/// split off a common norm generator at equal scales, rescale the top Jordan
/// component otherwise, ending at the full group when a hyperbolic top block
/// appears. `fast_path` applies the parity-graded jump to M-double-dagger
/// instead of stepwise rescaling.
TransporterNorms transporter_norms(const QuadLattice& M, const Mat& inj, bool fast_path = false);

struct NormPrincipleReport {
    bool holds_X = false, holds_X_plus = false, holds_O = false, holds_O_plus = false;
    SCSubgroup base_X, base_X_plus, base_O, base_O_plus;
    SCSubgroup normed_X, normed_X_plus, normed_O, normed_O_plus;

    bool all() const { return holds_X && holds_X_plus && holds_O && holds_O_plus; }
};

/// Verifies the norm principles for theta(O), theta(O+), theta(X), theta(X+)
/// under base change along the tower.
NormPrincipleReport norm_principle_verify(const QuadLattice& M, const Mat& inj, const ExtensionTower& t);

}  // namespace qlat
