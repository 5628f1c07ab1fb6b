#pragma once

#include <optional>
#include <vector>

#include "qlat/field.hpp"

namespace qlat {

/// Dense matrix over a local field, row-major.
struct Mat {
    FieldPtr K;
    int rows = 0, cols = 0;
    std::vector<FElem> a;

    FElem& at(int i, int j) { return a[(size_t)i * cols + j]; }
    const FElem& at(int i, int j) const { return a[(size_t)i * cols + j]; }
};

Mat mat_make(const FieldPtr& K, int r, int c);
Mat mat_identity(const FieldPtr& K, int n);
Mat mat_mul(const Mat& A, const Mat& B);
Mat mat_transpose(const Mat& A);
Mat mat_sub(const Mat& A, const Mat& B);
FElem mat_det(const Mat& A);
Mat mat_inverse(const Mat& A);
Mat mat_congruent(const Mat& T, const Mat& G);  // T^t G T
bool mat_is_zero(const Mat& A);
bool mat_eq(const Mat& A, const Mat& B);
std::vector<FElem> mat_apply(const Mat& A, const std::vector<FElem>& v);
Mat mat_from_cols(const FieldPtr& K, const std::vector<std::vector<FElem>>& cols);
std::vector<FElem> mat_col(const Mat& A, int j);

FElem quad_value(const Mat& G, const std::vector<FElem>& v);                       // v^t G v
FElem pair_value(const Mat& G, const std::vector<FElem>& u, const std::vector<FElem>& v);  // u^t G v

/// Non-degenerate quadratic space over F (checked at construction).
struct QuadSpace {
    FieldPtr K;
    Mat gram;

    int dim() const { return gram.rows; }
};

QuadSpace make_space(const FieldPtr& K, Mat gram);          // DegenerateSpace on det = 0
QuadSpace space_from_diag(const FieldPtr& K, const std::vector<FElem>& d);
QuadSpace space_orth_sum(const QuadSpace& a, const QuadSpace& b);

struct SpaceInvariants {
    int dim = 0;
    SquareClass det_class;
    int hasse = 1;

    bool operator==(const SpaceInvariants& o) const {
        return dim == o.dim && det_class == o.det_class && hasse == o.hasse;
    }
};

struct Diagonalization {
    std::vector<FElem> entries;
    Mat basis;  // basis^t G basis = diag(entries)
};

Diagonalization diagonalize(const QuadSpace& V);
SpaceInvariants invariants(const QuadSpace& V);
bool is_isotropic(const QuadSpace& V);
bool is_isometric_space(const QuadSpace& V, const QuadSpace& W);
bool represents_space(const QuadSpace& V, const QuadSpace& W);    // W represented by V
std::optional<QuadSpace> space_from_invariants(const FieldPtr& K, const SpaceInvariants& inv);
QuadSpace base_change_space(const QuadSpace& V, const ExtensionTower& t);

/// Quadratic lattice: free module of full rank on the standard basis of F^n
/// over the valuation ring, with a non-degenerate Gram matrix over F (entries
/// may have negative valuation).
struct QuadLattice {
    FieldPtr K;
    Mat gram;

    int rank() const { return gram.rows; }
    QuadSpace space() const { return QuadSpace{K, gram}; }
};

QuadLattice make_lattice(const FieldPtr& K, Mat gram);      // DegenerateLattice on det = 0

long scale_exp(const QuadLattice& L);
QuadLattice dual(const QuadLattice& L);
QuadLattice rescale(const QuadLattice& L, long k);          // pi^k L
bool is_modular(const QuadLattice& L);

struct JordanComponent {
    long s = 0;                 // scale exponent
    Mat gram;                   // component Gram in the split basis
    Mat basis;                  // n x rank, columns in the original coordinates
    std::vector<FElem> norm_gen;   // vector in original coordinates, v(Q) = s
    SquareClass norm_class;
};

struct JordanSplitting {
    FieldPtr K;
    std::vector<JordanComponent> comps;
    Mat transition;             // n x n over the valuation ring, unit determinant
};

JordanSplitting jordan_split(const QuadLattice& L);

struct HyperbolicPair {
    std::vector<FElem> x, y;  // Q(x), Q(y) zero (exact) or certified small
    bool exact = true;
    long cert_level = 0;       // exact=false: v(Q(x)), v(Q(y)) >= cert_level
};

std::optional<HyperbolicPair> hyperbolic_split(const QuadLattice& L);

bool is_isometric_lattice(const QuadLattice& L, const QuadLattice& Kl);

struct Isometry {
    Mat m;
    int det_sign = 1;
};

Isometry make_isometry(const QuadSpace& V, Mat m);          // NotIsometry if gram not preserved
Isometry reflection(const std::vector<FElem>& u, const QuadSpace& V);  // IsotropicVector
Isometry isometry_compose(const QuadSpace& V, const Isometry& a, const Isometry& b);
SquareClass spinor_norm(const Isometry& s, const QuadSpace& V);

/// Exact square root in the dense subring when one exists.
std::optional<FElem> exact_sqrt(const FieldPtr& K, const FElem& x);

/// Basis (n x (n-1)) of {m : <m, x> = 0} inside the standard lattice R^n,
/// for primitive-enough data; columns have ring entries.
Mat orthogonal_complement_basis(const QuadLattice& L, const std::vector<FElem>& x);

}  // namespace qlat
