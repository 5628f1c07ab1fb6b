#include "qlat/global.hpp"

#include <algorithm>
#include <map>

namespace qlat {

GlobalLattice make_global_lattice(const FqPtr& F, int n, std::vector<RatFunc> gram) {
    if ((int)gram.size() != n * n) fail("MalformedInput", "global lattice: gram size mismatch");
    GlobalLattice M{F, n, std::move(gram)};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!(rf_sub(M.at(i, j), M.at(j, i)).num.is_zero()))
                fail("MalformedInput", "global lattice: gram matrix not symmetric");
    // non-degeneracy via any completion
    QuadLattice Lt = local_at(M, make_place(fqp_x(F)));
    (void)Lt;  // construction checks det != 0
    return M;
}

Place make_place(FqPoly poly) {
    const FqPtr& F = poly.F;
    if (poly.deg() < 1) fail("MalformedInput", "place polynomial must be non-constant");
    if (!(poly.c.back() == F->one())) fail("MalformedInput", "place polynomial must be monic");
    if (!fqp_is_irreducible(poly)) fail("MalformedInput", "place polynomial must be irreducible");
    return Place{std::move(poly)};
}

QuadLattice local_at(const GlobalLattice& M, const Place& v) {
    FieldPtr K = LocalField::laurent_at(M.F, v.poly);
    Mat G = mat_make(K, M.n, M.n);
    for (int i = 0; i < M.n; ++i)
        for (int j = 0; j < M.n; ++j) G.at(i, j) = K->from_rf(M.at(i, j));
    return make_lattice(K, std::move(G));
}

namespace {

bool place_less(const FqPoly& a, const FqPoly& b) {
    if (a.deg() != b.deg()) return a.deg() < b.deg();
    const FqPtr& F = a.F;
    for (int i = a.deg(); i >= 0; --i) {
        uint64_t x = F->index_of(a.c[i]), y = F->index_of(b.c[i]);
        if (x != y) return x < y;
    }
    return false;
}

void add_factors(std::vector<FqPoly>& acc, const FqPoly& f) {
    if (f.deg() < 1) return;
    for (auto& [g, m] : fqp_factor(f)) acc.push_back(g);
}

RatFunc global_det(const GlobalLattice& M) {
    // exact determinant of the Gram matrix as a rational function; computed
    // through any completion since the payload is the same
    QuadLattice L = local_at(M, make_place(fqp_x(M.F)));
    FElem d = mat_det(L.gram);
    return d.rf();
}

}  // namespace

std::vector<Place> bad_places(const GlobalLattice& N, const GlobalLattice& M) {
    std::vector<FqPoly> fac;
    for (const auto& e : N.gram) {
        add_factors(fac, e.num);
        add_factors(fac, e.den);
    }
    for (const auto& e : M.gram) {
        add_factors(fac, e.num);
        add_factors(fac, e.den);
    }
    RatFunc dn = global_det(N), dm = global_det(M);
    add_factors(fac, dn.num);
    add_factors(fac, dn.den);
    add_factors(fac, dm.num);
    add_factors(fac, dm.den);
    std::sort(fac.begin(), fac.end(), place_less);
    fac.erase(std::unique(fac.begin(), fac.end(), [](const FqPoly& a, const FqPoly& b) { return a == b; }),
              fac.end());
    std::vector<Place> out;
    for (auto& f : fac) out.push_back(Place{f});
    return out;
}

GlobalEmbedReport everywhere_local_embeds(const GlobalLattice& N, const GlobalLattice& M,
                                          const std::vector<Place>& extra_places) {
    if (N.F != M.F) fail("RingMismatch", "global lattices over different coefficient fields");
    GlobalEmbedReport rep;
    int gap = M.n - N.n;
    if (gap < 3 && extra_places.empty())
        fail("GapTooSmall",
             "rank gap below 3: good places are not automatic, supply an explicit place list");
    rep.good_places_auto = gap >= 3;

    std::vector<Place> places;
    if (rep.good_places_auto) places = bad_places(N, M);
    for (const auto& p : extra_places) places.push_back(p);
    std::sort(places.begin(), places.end(), [](const Place& a, const Place& b) { return place_less(a.poly, b.poly); });
    places.erase(std::unique(places.begin(), places.end(),
                             [](const Place& a, const Place& b) { return a.poly == b.poly; }),
                 places.end());

    rep.overall = true;
    for (const auto& v : places) {
        QuadLattice Nl = local_at(N, v), Ml = local_at(M, v);
        bool ok = omeara_embeds(Nl, Ml);
        rep.checked.push_back(PlaceVerdict{v, ok});
        if (!ok) rep.overall = false;
    }
    return rep;
}

}  // namespace qlat
