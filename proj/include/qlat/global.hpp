#pragma once

#include "qlat/embed.hpp"
#include "qlat/lattice.hpp"

namespace qlat {

/// Free quadratic lattice over F_q[t], Gram entries in F_q(t).
struct GlobalLattice {
    FqPtr F;
    int n = 0;
    std::vector<RatFunc> gram;  // row-major, symmetric

    const RatFunc& at(int i, int j) const { return gram[(size_t)i * n + j]; }
};

GlobalLattice make_global_lattice(const FqPtr& F, int n, std::vector<RatFunc> gram);

/// Finite place of F_q[t]: a monic irreducible polynomial.
struct Place {
    FqPoly poly;
};

Place make_place(FqPoly poly);  // verifies monic irreducibility

/// Completion at a place: the same Gram entries read over the local field
/// with uniformizer the place polynomial.
QuadLattice local_at(const GlobalLattice& M, const Place& v);

struct PlaceVerdict {
    Place place;
    bool embeds = false;
};

struct GlobalEmbedReport {
    std::vector<PlaceVerdict> checked;   // bad places plus any requested ones
    bool good_places_auto = false;       // rank gap >= 3 shortcut applied
    bool overall = false;
};

/// Everywhere-local embedding report. With rank gap >= 3 the finitely many
/// bad places decide; otherwise an explicit place list is required
/// (GapTooSmall).
GlobalEmbedReport everywhere_local_embeds(const GlobalLattice& N, const GlobalLattice& M,
                                          const std::vector<Place>& extra_places = {});

/// Deterministically ordered union of the irreducible factors of the
/// numerators and denominators of all Gram entries and both determinants.
std::vector<Place> bad_places(const GlobalLattice& N, const GlobalLattice& M);

}  // namespace qlat
