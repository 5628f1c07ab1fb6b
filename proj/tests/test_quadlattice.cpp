#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gen.hpp"
#include "qlat/lattice.hpp"

using namespace qlat;
using namespace qlat::testgen;

namespace {

Mat dm(const FieldPtr& K, std::vector<long> d) {
    Mat G = mat_make(K, (int)d.size(), (int)d.size());
    for (int i = 0; i < (int)d.size(); ++i) G.at(i, i) = K->from_long(d[i]);
    return G;
}

QuadLattice dl(const FieldPtr& K, std::vector<long> d) { return make_lattice(K, dm(K, std::move(d))); }

Mat hyp(const FieldPtr& K, long s) {
    Mat G = mat_make(K, 2, 2);
    G.at(0, 1) = K->pi_pow(s);
    G.at(1, 0) = K->pi_pow(s);
    return G;
}

}  // namespace

TEST_CASE("scale, dual, rescale") {
    auto Q3 = LocalField::padic(3);
    CHECK(scale_exp(dl(Q3, {1, 3})) == 0);
    CHECK(scale_exp(make_lattice(Q3, hyp(Q3, 1))) == 1);
    QuadLattice frac = make_lattice(Q3, [&] {
        Mat G = mat_make(Q3, 1, 1);
        G.at(0, 0) = Q3->from_rat(mpq_class(1, 3));
        return G;
    }());
    CHECK(scale_exp(frac) == -1);

    QuadLattice L3 = dl(Q3, {3});
    QuadLattice D = dual(L3);
    CHECK(Q3->eq(D.gram.at(0, 0), Q3->from_rat(mpq_class(1, 3))));
    CHECK(mat_eq(dual(D).gram, L3.gram));
    QuadLattice H = make_lattice(Q3, hyp(Q3, 1));
    CHECK(Q3->eq(dual(H).gram.at(0, 1), Q3->from_rat(mpq_class(1, 3))));

    CHECK(mat_eq(rescale(dl(Q3, {1}), 1).gram, dm(Q3, {9})));
    CHECK(mat_eq(rescale(dl(Q3, {5}), 0).gram, dm(Q3, {5})));
    CHECK(mat_eq(rescale(rescale(dl(Q3, {7}), 1), -1).gram, dm(Q3, {7})));
}

TEST_CASE("jordan splitting: examples") {
    auto Q3 = LocalField::padic(3);
    auto J = jordan_split(dl(Q3, {1, 3, 9}));
    REQUIRE(J.comps.size() == 3);
    CHECK(J.comps[0].s == 0);
    CHECK(J.comps[1].s == 1);
    CHECK(J.comps[2].s == 2);
    for (const auto& c : J.comps) CHECK(c.gram.rows == 1);

    Mat G = mat_make(Q3, 2, 2);
    G.at(0, 0) = Q3->from_long(3);
    G.at(0, 1) = Q3->one();
    G.at(1, 0) = Q3->one();
    G.at(1, 1) = Q3->from_long(3);
    auto J2 = jordan_split(make_lattice(Q3, G));
    REQUIRE(J2.comps.size() == 1);
    CHECK(J2.comps[0].s == 0);
    CHECK(J2.comps[0].gram.rows == 2);

    auto J3 = jordan_split(make_lattice(Q3, hyp(Q3, 1)));
    REQUIRE(J3.comps.size() == 1);
    CHECK(J3.comps[0].s == 1);
    CHECK(J3.comps[0].gram.rows == 2);
    // norm generator exists even though the diagonal vanishes
    CHECK(Q3->valuation(quad_value(hyp(Q3, 1), J3.comps[0].norm_gen)) == 1);
}

TEST_CASE("jordan uniqueness under unimodular changes of basis") {
    Rng rng(301);
    std::vector<FieldPtr> fields = {LocalField::padic(3), LocalField::padic(5), LocalField::laurent(3)};
    for (int trial = 0; trial < 200; ++trial) {
        const FieldPtr& K = fields[trial % 3];
        int n = (int)rnd_int(rng, 1, 5);
        QuadLattice L = rnd_lattice(K, n, rng, 2);
        Mat U = rnd_unimodular(K, n, rng);
        QuadLattice L2 = make_lattice(K, mat_congruent(U, L.gram));
        auto J1 = jordan_split(L), J2 = jordan_split(L2);
        REQUIRE(J1.comps.size() == J2.comps.size());
        for (size_t i = 0; i < J1.comps.size(); ++i) {
            CHECK(J1.comps[i].s == J2.comps[i].s);
            CHECK(J1.comps[i].gram.rows == J2.comps[i].gram.rows);
            CHECK(invariants(QuadSpace{K, J1.comps[i].gram}) == invariants(QuadSpace{K, J2.comps[i].gram}));
        }
        CHECK(K->valuation(mat_det(J1.transition)) == 0);
    }
}

TEST_CASE("hyperbolic splits follow isotropy exactly") {
    auto Q3 = LocalField::padic(3);
    {
        auto h = hyperbolic_split(make_lattice(Q3, hyp(Q3, 0)));
        REQUIRE(h);
        CHECK(h->exact);
    }
    {
        auto h = hyperbolic_split(dl(Q3, {1, -1}));
        REQUIRE(h);
        CHECK(h->exact);
        Mat G = dm(Q3, {1, -1});
        CHECK(Q3->is_zero(quad_value(G, h->x)));
        CHECK(Q3->is_zero(quad_value(G, h->y)));
        CHECK(Q3->valuation(pair_value(G, h->x, h->y)) == 0);
    }
    CHECK(!hyperbolic_split(dl(Q3, {1, 1})));
    CHECK_THROWS_AS(hyperbolic_split(dl(Q3, {1, 3})), Error);

    Rng rng(302);
    std::vector<FieldPtr> fields = {Q3, LocalField::laurent(3)};
    for (int trial = 0; trial < 100; ++trial) {
        const FieldPtr& K = fields[trial % 2];
        int n = (int)rnd_int(rng, 1, 4);
        QuadLattice L = rnd_modular_lattice(K, n, rng, rnd_int(rng, 0, 2));
        auto h = hyperbolic_split(L);
        CHECK((bool)h == is_isotropic(L.space()));
        if (h) {
            long s = scale_exp(L);
            CHECK(K->valuation(pair_value(L.gram, h->x, h->y)) == s);
            if (h->exact) {
                CHECK(K->is_zero(quad_value(L.gram, h->x)));
                CHECK(K->is_zero(quad_value(L.gram, h->y)));
            } else {
                CHECK(K->valuation(quad_value(L.gram, h->x)) >= h->cert_level);
                CHECK(K->valuation(quad_value(L.gram, h->y)) >= h->cert_level);
                CHECK(h->cert_level >= 2 * s + 5);
            }
        }
    }
}

TEST_CASE("anisotropic modular lattices: primitive vectors sit at the scale") {
    Rng rng(303);
    std::vector<FieldPtr> fields = {LocalField::padic(3), LocalField::laurent(3)};
    int done = 0;
    while (done < 10) {
        const FieldPtr& K = fields[done % 2];
        int n = (int)rnd_int(rng, 1, 4);
        long s = rnd_int(rng, 0, 2);
        QuadLattice L = rnd_modular_lattice(K, n, rng, s);
        if (is_isotropic(L.space())) continue;
        ++done;
        for (int i = 0; i < 50; ++i) {
            // random primitive vector
            std::vector<FElem> v((size_t)n, K->zero());
            bool prim = false;
            for (int j = 0; j < n; ++j) {
                long e = rnd_int(rng, 0, 2);
                if (rnd_int(rng, 0, 3) == 0) {
                    v[j] = K->zero();
                } else {
                    v[j] = K->mul(K->pi_pow(e), rnd_unit(K, rng));
                    if (e == 0) prim = true;
                }
            }
            if (!prim) {
                v[(size_t)rnd_int(rng, 0, n - 1)] = rnd_unit(K, rng);
            }
            CHECK(K->valuation(quad_value(L.gram, v)) == scale_exp(L));
        }
    }
}

TEST_CASE("lattice isometry: examples and cancellation") {
    auto Q3 = LocalField::padic(3);
    CHECK(is_isometric_lattice(dl(Q3, {1, 3}), dl(Q3, {3, 1})));
    CHECK(is_isometric_lattice(dl(Q3, {1, 1}), dl(Q3, {2, 2})));
    CHECK(!is_isometric_lattice(dl(Q3, {1}), dl(Q3, {3})));

    Rng rng(304);
    std::vector<FieldPtr> fields = {Q3, LocalField::padic(5), LocalField::laurent(3)};
    int premise_true = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const FieldPtr& K = fields[trial % 3];
        int n1 = (int)rnd_int(rng, 1, 2), n2 = (int)rnd_int(rng, 1, 2);
        QuadLattice Lp = rnd_lattice(K, n1, rng, 1);
        QuadLattice Ls = rnd_lattice(K, n2, rng, 1);
        // K' isometric to L' by construction; K'' an independent candidate
        QuadLattice Kp = make_lattice(K, mat_congruent(rnd_unimodular(K, n1, rng), Lp.gram));
        QuadLattice Ks = (trial % 2 == 0)
                             ? make_lattice(K, mat_congruent(rnd_unimodular(K, n2, rng), Ls.gram))
                             : rnd_lattice(K, n2, rng, 1);
        auto orth = [&](const QuadLattice& A, const QuadLattice& B) {
            Mat G = mat_make(K, A.rank() + B.rank(), A.rank() + B.rank());
            for (int i = 0; i < A.rank(); ++i)
                for (int j = 0; j < A.rank(); ++j) G.at(i, j) = A.gram.at(i, j);
            for (int i = 0; i < B.rank(); ++i)
                for (int j = 0; j < B.rank(); ++j) G.at(A.rank() + i, A.rank() + j) = B.gram.at(i, j);
            return make_lattice(K, G);
        };
        QuadLattice L = orth(Lp, Ls), Kk = orth(Kp, Ks);
        if (is_isometric_lattice(Lp, Kp) && is_isometric_lattice(L, Kk)) {
            ++premise_true;
            CHECK(is_isometric_lattice(Ls, Ks));
        }
    }
    CHECK(premise_true >= 40);
}

TEST_CASE("reflections") {
    auto Q3 = LocalField::padic(3);
    QuadSpace V = make_space(Q3, dm(Q3, {1, -1}));
    Isometry r = reflection({Q3->one(), Q3->zero()}, V);
    CHECK(Q3->eq(r.m.at(0, 0), Q3->from_long(-1)));
    CHECK(Q3->eq(r.m.at(1, 1), Q3->one()));
    CHECK(r.det_sign == -1);

    QuadSpace W = make_space(Q3, dm(Q3, {1, 1}));
    Isometry r2 = reflection({Q3->one(), Q3->one()}, W);
    CHECK(r2.det_sign == -1);
    CHECK_THROWS_AS(reflection({Q3->one(), Q3->one()}, V), Error);  // isotropic vector

    Rng rng(305);
    for (int i = 0; i < 20; ++i) {
        QuadSpace U = make_space(Q3, dm(Q3, {1, 2, 3}));
        std::vector<FElem> u;
        do {
            u = {Q3->from_long(rnd_int(rng, -4, 4)), Q3->from_long(rnd_int(rng, -4, 4)),
                 Q3->from_long(rnd_int(rng, -4, 4))};
        } while (Q3->is_zero(quad_value(U.gram, u)));
        Isometry t = reflection(u, U);
        CHECK(mat_eq(mat_mul(t.m, t.m), mat_identity(Q3, 3)));
    }
}

TEST_CASE("spinor norms of isometries") {
    auto Q3 = LocalField::padic(3);
    QuadSpace W = make_space(Q3, dm(Q3, {1, 1}));
    CHECK(sc_str(spinor_norm(make_isometry(W, mat_identity(Q3, 2)), W)) == "1");
    CHECK(sc_str(spinor_norm(reflection({Q3->one(), Q3->one()}, W), W)) == "u");
    {
        Mat m = dm(Q3, {-1, -1});
        CHECK(sc_str(spinor_norm(make_isometry(W, m), W)) == "1");
    }
    CHECK_THROWS_AS(make_isometry(W, dm(Q3, {1, 2})), Error);

    // homomorphism property on random products of reflections
    Rng rng(306);
    QuadSpace U = make_space(Q3, dm(Q3, {1, 2, 3}));
    auto rnd_isom = [&]() {
        Isometry acc = make_isometry(U, mat_identity(Q3, 3));
        int k = (int)rnd_int(rng, 0, 3);
        for (int i = 0; i < k; ++i) {
            std::vector<FElem> u;
            do {
                u = {Q3->from_long(rnd_int(rng, -4, 4)), Q3->from_long(rnd_int(rng, -4, 4)),
                     Q3->from_long(rnd_int(rng, -4, 4))};
            } while (Q3->is_zero(quad_value(U.gram, u)));
            acc = isometry_compose(U, acc, reflection(u, U));
        }
        return acc;
    };
    for (int i = 0; i < 100; ++i) {
        Isometry a = rnd_isom(), b = rnd_isom();
        CHECK(spinor_norm(isometry_compose(U, a, b), U) ==
              sc_mul(spinor_norm(a, U), spinor_norm(b, U)));
    }
}

TEST_CASE("anisotropic modular lattices are stabilized by reflections along primitive vectors") {
    Rng rng(307);
    auto Q3 = LocalField::padic(3);
    auto F3t = LocalField::laurent(3);
    int done = 0;
    while (done < 10) {
        const FieldPtr& K = (done % 2) ? Q3 : FieldPtr(F3t);
        QuadLattice L = rnd_modular_lattice(K, (int)rnd_int(rng, 1, 3), rng, rnd_int(rng, 0, 1));
        if (is_isotropic(L.space())) continue;
        ++done;
        QuadSpace V = L.space();
        int n = L.rank();
        for (int i = 0; i < 50; ++i) {
            std::vector<FElem> u;
            do {
                u.assign((size_t)n, K->zero());
                u[(size_t)rnd_int(rng, 0, n - 1)] = K->one();
                for (int j = 0; j < n; ++j)
                    if (rnd_int(rng, 0, 1)) u[j] = K->add(u[j], rnd_ring_elem(K, rng, 1));
            } while (K->is_zero(quad_value(V.gram, u)));
            Isometry t = reflection(u, V);
            // reflection matrix must have ring entries (it stabilizes L)
            bool ring = true;
            for (const auto& x : t.m.a)
                if (!K->is_zero(x) && K->valuation(x) < 0) ring = false;
            CHECK(ring);
        }
    }
}
