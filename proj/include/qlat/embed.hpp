#pragma once

#include <optional>

#include "qlat/lattice.hpp"

namespace qlat {

/// Orthogonal sum of the Jordan components with scale exponent <= i.
QuadLattice sublattice_leq(const JordanSplitting& J, long i);

/// O'Meara's criterion: N embeds into M over the valuation ring iff the
/// chains of ambient spaces F x (..)_{<=i} represent each other at every
/// occurring scale exponent.
bool omeara_embeds(const QuadLattice& N, const QuadLattice& M);

/// Witness for a represented value or an embedding. `exact` means the
/// verification identity holds in the dense subring; otherwise the witness
/// satisfies it to valuation >= cert_level, with the Newton condition
/// guaranteeing an exact solution of the completion nearby.
struct VectorWitness {
    std::vector<FElem> v;
    bool exact = true;
    long cert_level = 0;
};

std::optional<VectorWitness> find_vector(const QuadLattice& M, const FElem& a);

struct EmbeddingWitness {
    Mat T;
    bool exact = true;
    long cert_level = 0;
};

std::optional<EmbeddingWitness> find_embedding(const QuadLattice& N, const QuadLattice& M);

QuadLattice base_change_lattice(const QuadLattice& M, const ExtensionTower& t);

struct SpringerReport {
    bool embeds_base = false;
    bool embeds_ext = false;
    bool degree_odd = false;
    bool consistent = true;  // degree_odd implies embeds_base == embeds_ext
};

SpringerReport springer_verify(const QuadLattice& N, const QuadLattice& M, const ExtensionTower& t);

}  // namespace qlat
