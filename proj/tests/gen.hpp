#pragma once

// deterministic random generators shared by the test suites
#include <random>

#include "qlat/lattice.hpp"

namespace qlat::testgen {

using Rng = std::mt19937_64;

inline long rnd_int(Rng& rng, long lo, long hi) {
    return lo + (long)(rng() % (unsigned long)(hi - lo + 1));
}

inline FElem rnd_unit(const FieldPtr& K, Rng& rng) {
    if (K->kind == FKind::Padic) {
        long p = K->p.get_si();
        long u;
        do {
            u = rnd_int(rng, -9, 9);
        } while (u == 0 || u % p == 0);
        return K->from_long(u);
    }
    if (K->kind == FKind::Laurent) {
        // unit at the place: nonzero residue
        const FqPtr& F = K->coeff;
        while (true) {
            std::vector<FqElem> c;
            int d = (int)rnd_int(rng, 0, 2);
            for (int i = 0; i <= d; ++i) c.push_back(F->element_from_index(rng() % F->q));
            FElem x = K->from_rf(rf_from_poly(fqp_make(F, c)));
            if (!K->is_zero(x) && K->valuation(x) == 0) return x;
        }
    }
    // tower level: unit of the base embedded, optionally shifted by a lifted residue
    FElem b = K->embed(rnd_unit(K->base(), rng));
    FElem r = K->lift(K->kres->element_from_index(rng() % K->kres->q));
    FElem cand = K->add(b, K->mul(K->uniformizer(), r));
    return cand;
}

inline FElem rnd_ring_elem(const FieldPtr& K, Rng& rng, long maxval) {
    if (rnd_int(rng, 0, 4) == 0) return K->zero();
    long e = rnd_int(rng, 0, maxval);
    return K->mul(K->pi_pow(e), rnd_unit(K, rng));
}

inline Mat rnd_unimodular(const FieldPtr& K, int n, Rng& rng) {
    Mat U = mat_identity(K, n);
    int ops = 2 * n + 3;
    for (int k = 0; k < ops; ++k) {
        int i = (int)rnd_int(rng, 0, n - 1);
        int j = (int)rnd_int(rng, 0, n - 1);
        switch (rnd_int(rng, 0, 2)) {
            case 0: {
                if (i == j) break;
                FElem c = rnd_ring_elem(K, rng, 1);
                for (int t = 0; t < n; ++t) U.at(t, i) = K->add(U.at(t, i), K->mul(c, U.at(t, j)));
                break;
            }
            case 1: {
                if (i == j) break;
                for (int t = 0; t < n; ++t) std::swap(U.at(t, i), U.at(t, j));
                break;
            }
            default: {
                FElem u = rnd_unit(K, rng);
                for (int t = 0; t < n; ++t) U.at(t, i) = K->mul(u, U.at(t, i));
                break;
            }
        }
    }
    return U;
}

/// Random non-degenerate lattice: unimodular congruence of a block diagonal
/// of pi^e-units and occasional hyperbolic-type blocks.
inline QuadLattice rnd_lattice(const FieldPtr& K, int n, Rng& rng, long maxexp, bool allow_offdiag = true) {
    Mat D = mat_make(K, n, n);
    int i = 0;
    while (i < n) {
        long e = rnd_int(rng, 0, maxexp);
        if (allow_offdiag && i + 1 < n && rnd_int(rng, 0, 3) == 0) {
            FElem v = K->mul(K->pi_pow(e), rnd_unit(K, rng));
            D.at(i, i + 1) = v;
            D.at(i + 1, i) = v;
            if (rnd_int(rng, 0, 1)) {
                D.at(i, i) = K->mul(K->pi_pow(e + 1), rnd_unit(K, rng));
                D.at(i + 1, i + 1) = K->mul(K->pi_pow(e + 1), rnd_unit(K, rng));
            }
            i += 2;
        } else {
            D.at(i, i) = K->mul(K->pi_pow(e), rnd_unit(K, rng));
            ++i;
        }
    }
    Mat U = rnd_unimodular(K, n, rng);
    return make_lattice(K, mat_congruent(U, D));
}

/// Random modular lattice of the given scale.
inline QuadLattice rnd_modular_lattice(const FieldPtr& K, int n, Rng& rng, long s) {
    Mat D = mat_make(K, n, n);
    FElem pis = K->pi_pow(s);
    for (int i = 0; i < n; ++i) D.at(i, i) = K->mul(pis, rnd_unit(K, rng));
    if (n >= 2 && rnd_int(rng, 0, 2) == 0) {
        // hyperbolic-type corner
        D.at(0, 0) = K->zero();
        D.at(1, 1) = K->zero();
        D.at(0, 1) = pis;
        D.at(1, 0) = pis;
    }
    Mat U = rnd_unimodular(K, n, rng);
    return make_lattice(K, mat_congruent(U, D));
}

/// Random sublattice injection of full rank m into M, scaled by pi^k.
inline Mat rnd_sublattice_inj(const QuadLattice& M, int m, Rng& rng, long k) {
    const FieldPtr& K = M.K;
    int n = M.rank();
    while (true) {
        Mat T = mat_make(K, n, m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < n; ++i) T.at(i, j) = rnd_ring_elem(K, rng, 1);
        FElem piK = K->pi_pow(k);
        for (auto& x : T.a) x = K->mul(piK, x);
        Mat G = mat_congruent(T, M.gram);
        if (m == 0 || !K->is_zero(mat_det(G))) return T;
    }
}

inline std::vector<FElem> eisenstein_coeffs(const FieldPtr& K, int e) {
    // x^e - pi
    std::vector<FElem> low((size_t)e, K->zero());
    low[0] = K->neg(K->uniformizer());
    return low;
}

}  // namespace qlat::testgen
