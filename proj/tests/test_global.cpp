#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>

#include "gen.hpp"
#include "qlat/global.hpp"

using namespace qlat;
using namespace qlat::testgen;

namespace {

RatFunc rf(const FqPtr& F, std::vector<long long> c) { return rf_from_poly(fqp_from_ints(F, std::move(c))); }

GlobalLattice diag_global(const FqPtr& F, std::vector<RatFunc> d) {
    int n = (int)d.size();
    std::vector<RatFunc> g((size_t)n * n, rf(F, {0}));
    for (int i = 0; i < n; ++i) g[(size_t)i * n + i] = d[(size_t)i];
    return make_global_lattice(F, n, std::move(g));
}

}  // namespace

TEST_CASE("completions at places") {
    FqPtr F3 = FqField::get(3, 1);
    GlobalLattice M = diag_global(F3, {rf(F3, {1}), rf(F3, {-2}), rf(F3, {0, 2}), rf(F3, {0, 0, 0, -1})});
    {
        auto J = jordan_split(local_at(M, make_place(fqp_x(F3))));
        REQUIRE(J.comps.size() == 3);
        CHECK(J.comps[0].s == 0);
        CHECK(J.comps[0].gram.rows == 2);
        CHECK(J.comps[1].s == 1);
        CHECK(J.comps[1].gram.rows == 1);
        CHECK(J.comps[2].s == 3);
        CHECK(J.comps[2].gram.rows == 1);
    }
    {
        // at t - 1 everything is a unit
        QuadLattice L = local_at(M, make_place(fqp_from_ints(F3, {-1, 1})));
        CHECK(scale_exp(L) == 0);
        CHECK(is_modular(L));
    }
    {
        GlobalLattice One = diag_global(F3, {rf(F3, {1})});
        QuadLattice L = local_at(One, make_place(fqp_from_ints(F3, {1, 0, 1})));  // t^2+1, irreducible
        CHECK(scale_exp(L) == 0);
        CHECK(L.K->kres->q == 9);
    }
    CHECK_THROWS_AS(make_place(fqp_from_ints(F3, {2, 0, 1})), Error);  // t^2+2 = (t+1)(t+2)
}

TEST_CASE("paper function-field lattice: computed local verdicts") {
    FqPtr F3 = FqField::get(3, 1);
    GlobalLattice M = diag_global(F3, {rf(F3, {1}), rf(F3, {-2}), rf(F3, {0, 2}), rf(F3, {0, 0, 0, -1})});
    GlobalLattice N = diag_global(F3, {rf(F3, {0, 1})});

    auto t0 = std::chrono::steady_clock::now();
    auto rep = everywhere_local_embeds(N, M);
    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 60.0);
    CHECK(rep.good_places_auto);
    REQUIRE(rep.checked.size() == 1);
    CHECK(fqp_str(rep.checked[0].place.poly) == "1*t");

    // the verdict at (t) is false; confirmed by the exhaustive congruence
    // search below, independent of the criterion machinery
    CHECK(!rep.checked[0].embeds);
    CHECK(!rep.overall);
    {
        QuadLattice Mt = local_at(M, make_place(fqp_x(F3)));
        const FieldPtr& K = Mt.K;
        FElem target = K->from_rf(rf(F3, {0, 1}));
        bool any = false;
        for (int a = 0; a < 27 && !any; ++a)
            for (int b = 0; b < 27 && !any; ++b)
                for (int c = 0; c < 27 && !any; ++c)
                    for (int d = 0; d < 27 && !any; ++d) {
                        auto mk = [&](int v) { return K->from_rf(rf(F3, {v % 3, (v / 3) % 3, (v / 9) % 3})); };
                        std::vector<FElem> vec = {mk(a), mk(b), mk(c), mk(d)};
                        FElem f = K->sub(quad_value(Mt.gram, vec), target);
                        if (K->is_zero(f) || K->valuation(f) >= 3) any = true;
                    }
        CHECK(!any);
    }
}

TEST_CASE("everywhere-local reports") {
    FqPtr F3 = FqField::get(3, 1);
    {
        // N = M with an explicit place list (rank gap 0)
        GlobalLattice M = diag_global(F3, {rf(F3, {1}), rf(F3, {0, 1})});
        CHECK_THROWS_AS(everywhere_local_embeds(M, M), Error);
        auto rep = everywhere_local_embeds(M, M, {make_place(fqp_x(F3))});
        CHECK(rep.overall);
        CHECK(!rep.good_places_auto);
    }
    {
        // <t> into <1,1,1,1>: representable at (t) since x^2 = 1 + t has a
        // Hensel root, so Q(x,1,1,0) = x^2 + 2 = t in characteristic 3
        GlobalLattice M = diag_global(F3, {rf(F3, {1}), rf(F3, {1}), rf(F3, {1}), rf(F3, {1})});
        GlobalLattice N = diag_global(F3, {rf(F3, {0, 1})});
        auto rep = everywhere_local_embeds(N, M, {make_place(fqp_x(F3))});
        bool at_t = false;
        for (const auto& pv : rep.checked)
            if (fqp_str(pv.place.poly) == "1*t") at_t = pv.embeds;
        CHECK(at_t);
        QuadLattice Mt = local_at(M, make_place(fqp_x(F3)));
        auto w = find_vector(Mt, Mt.K->from_rf(rf(F3, {0, 1})));
        CHECK(w);
    }
}

TEST_CASE("rescaling a global lattice shifts local scales by two") {
    FqPtr F3 = FqField::get(3, 1);
    Rng rng(601);
    for (int trial = 0; trial < 50; ++trial) {
        int n = (int)rnd_int(rng, 1, 3);
        std::vector<RatFunc> d;
        for (int i = 0; i < n; ++i) {
            std::vector<long long> c;
            int deg = (int)rnd_int(rng, 0, 2);
            for (int j = 0; j <= deg; ++j) c.push_back(rnd_int(rng, 0, 2));
            FqPoly p = fqp_from_ints(F3, c);
            if (p.is_zero()) p = fqp_one(F3);
            d.push_back(rf_from_poly(p));
        }
        GlobalLattice M = diag_global(F3, d);
        FqPoly place = fqp_x(F3);
        std::vector<RatFunc> d2;
        for (auto& x : d) d2.push_back(rf_mul(x, rf_make(fqp_mul(place, place), fqp_one(F3))));
        GlobalLattice M2 = diag_global(F3, d2);
        auto J1 = jordan_split(local_at(M, make_place(place)));
        auto J2 = jordan_split(local_at(M2, make_place(place)));
        REQUIRE(J1.comps.size() == J2.comps.size());
        for (size_t i = 0; i < J1.comps.size(); ++i) CHECK(J2.comps[i].s == J1.comps[i].s + 2);
    }
}

TEST_CASE("good places do not change verdicts when checked explicitly") {
    FqPtr F3 = FqField::get(3, 1);
    Rng rng(602);
    // a pool of places to add
    std::vector<Place> pool;
    pool.push_back(make_place(fqp_from_ints(F3, {-1, 1})));
    pool.push_back(make_place(fqp_from_ints(F3, {1, 1})));
    pool.push_back(make_place(fqp_from_ints(F3, {1, 0, 1})));
    pool.push_back(make_place(fqp_from_ints(F3, {2, 1, 1})));
    pool.push_back(make_place(fqp_from_ints(F3, {2, 2, 1})));
    for (int trial = 0; trial < 50; ++trial) {
        int nn = 1;
        int nm = nn + 3;
        std::vector<RatFunc> dn, dmv;
        auto rnd_entry = [&]() {
            std::vector<long long> c;
            int deg = (int)rnd_int(rng, 0, 2);
            for (int j = 0; j <= deg; ++j) c.push_back(rnd_int(rng, 0, 2));
            FqPoly p = fqp_from_ints(F3, c);
            if (p.is_zero()) p = fqp_one(F3);
            return rf_from_poly(p);
        };
        for (int i = 0; i < nn; ++i) dn.push_back(rnd_entry());
        for (int i = 0; i < nm; ++i) dmv.push_back(rnd_entry());
        GlobalLattice N = diag_global(F3, dn);
        GlobalLattice M = diag_global(F3, dmv);
        auto rep1 = everywhere_local_embeds(N, M);
        auto rep2 = everywhere_local_embeds(N, M, pool);
        CHECK(rep1.overall == rep2.overall);
        // the verdicts at the shared bad places are unchanged
        for (const auto& pv1 : rep1.checked)
            for (const auto& pv2 : rep2.checked)
                if (pv1.place.poly == pv2.place.poly) CHECK(pv1.embeds == pv2.embeds);
    }
}
