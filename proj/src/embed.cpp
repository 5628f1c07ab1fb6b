#include "qlat/embed.hpp"

#include <algorithm>
#include <set>

namespace qlat {

QuadLattice sublattice_leq(const JordanSplitting& J, long i) {
    const FieldPtr& K = J.K;
    int total = 0;
    for (const auto& c : J.comps)
        if (c.s <= i) total += c.gram.rows;
    Mat G = mat_make(K, total, total);
    int off = 0;
    for (const auto& c : J.comps) {
        if (c.s > i) continue;
        for (int a = 0; a < c.gram.rows; ++a)
            for (int b = 0; b < c.gram.rows; ++b) G.at(off + a, off + b) = c.gram.at(a, b);
        off += c.gram.rows;
    }
    return QuadLattice{K, std::move(G)};
}

bool omeara_embeds(const QuadLattice& N, const QuadLattice& M) {
    if (!same_field(N.K, M.K)) fail("RingMismatch", "embedding test over different rings");
    if (N.rank() == 0) return true;
    if (N.rank() > M.rank()) return false;
    JordanSplitting JN = jordan_split(N), JM = jordan_split(M);
    std::set<long> checkpoints;
    for (const auto& c : JN.comps) checkpoints.insert(c.s);
    for (const auto& c : JM.comps) checkpoints.insert(c.s);
    for (long i : checkpoints) {
        QuadLattice n_i = sublattice_leq(JN, i);
        QuadLattice m_i = sublattice_leq(JM, i);
        if (n_i.rank() > m_i.rank()) return false;
        if (n_i.rank() == 0) continue;
        if (!represents_space(m_i.space(), n_i.space())) return false;
    }
    return true;
}

namespace {

constexpr size_t kSearchCap = 2000000;

// smallest m >= 0 with pi^{2m} G and pi^{2m} * extras integral
long integral_shift(const QuadLattice& M, const std::vector<FElem>& extra) {
    const FieldPtr& K = M.K;
    long minv = 0;
    for (const auto& x : M.gram.a)
        if (!K->is_zero(x)) minv = std::min(minv, K->valuation(x));
    for (const auto& x : extra)
        if (!K->is_zero(x)) minv = std::min(minv, K->valuation(x));
    if (minv >= 0) return 0;
    return (-minv + 1) / 2;
}

struct DigitSpace {
    std::vector<FElem> digits;  // lifted residue representatives

    explicit DigitSpace(const FieldPtr& K) {
        uint64_t q = K->kres->q;
        for (uint64_t i = 0; i < q; ++i) digits.push_back(K->lift(K->kres->element_from_index(i)));
    }
};

bool is_integral(const FieldPtr& K, const FElem& x) { return K->is_zero(x) || K->valuation(x) >= 0; }

// ----------------------------------------------------------------------
// certified solver for z^t A z + 2 b^t z + c0 = 0 over the valuation ring

struct QuadProblem {
    FieldPtr K;
    Mat A;                  // symmetric, integral
    std::vector<FElem> b;   // integral
    FElem c0;               // integral
};

FElem qp_value(const QuadProblem& P, const std::vector<FElem>& z) {
    const FieldPtr& K = P.K;
    FElem acc = quad_value(P.A, z);
    for (size_t i = 0; i < z.size(); ++i) {
        FElem t = K->mul(P.b[i], z[i]);
        acc = K->add(acc, K->add(t, t));
    }
    return K->add(acc, P.c0);
}

// half-gradient A z + b; returns min coordinate valuation, capped
long qp_grad_val(const QuadProblem& P, const std::vector<FElem>& z, long cap) {
    const FieldPtr& K = P.K;
    long best = cap;
    for (int i = 0; i < P.A.rows; ++i) {
        FElem acc = P.b[i];
        for (int j = 0; j < P.A.cols; ++j) acc = K->add(acc, K->mul(P.A.at(i, j), z[j]));
        if (K->is_zero(acc)) continue;
        best = std::min(best, K->valuation(acc));
        if (best == 0) break;
    }
    return best;
}

int qp_grad_coord(const QuadProblem& P, const std::vector<FElem>& z, long c) {
    const FieldPtr& K = P.K;
    for (int i = 0; i < P.A.rows; ++i) {
        FElem acc = P.b[i];
        for (int j = 0; j < P.A.cols; ++j) acc = K->add(acc, K->mul(P.A.at(i, j), z[j]));
        if (!K->is_zero(acc) && K->valuation(acc) == c) return i;
    }
    return -1;
}

// one-coordinate Newton refinement to v(f) >= depth
void qp_refine(const QuadProblem& P, std::vector<FElem>& z, long depth) {
    const FieldPtr& K = P.K;
    for (int guard = 0; guard < 64; ++guard) {
        FElem f = qp_value(P, z);
        if (K->is_zero(f) || K->valuation(f) >= depth) return;
        long c = qp_grad_val(P, z, depth);
        int j = qp_grad_coord(P, z, c);
        if (j < 0) return;
        FElem g = P.b[j];
        for (int t = 0; t < P.A.cols; ++t) g = K->add(g, K->mul(P.A.at(j, t), z[t]));
        z[j] = K->sub(z[j], K->div(f, K->add(g, g)));
    }
}

struct QuadSolution {
    std::vector<FElem> z;
    bool exact;
    long flevel;  // certified: v(f(z)) after refinement
};

// candidate with cached half-gradient g = A z + b and value f(z)
struct QCand {
    std::vector<FElem> z;
    std::vector<FElem> g;
    FElem f;
};

/// Level-by-level digit enumeration with per-candidate Newton acceptance and
/// incrementally maintained gradients. `exhaustive` keeps expanding accepted
/// branches so that all level-kmax congruence classes of solutions are
/// produced; `frontier_cap` bounds lossy fast-path searches (0 = strict).
std::vector<QuadSolution> quad_solve(const QuadProblem& P, long kmax, long refine_depth, size_t max_out,
                                     bool exhaustive, size_t frontier_cap = 0) {
    const FieldPtr& K = P.K;
    int d = P.A.rows;
    std::vector<QuadSolution> out;
    if (d == 0) {
        if (K->is_zero(P.c0)) out.push_back({{}, true, 0});
        return out;
    }
    DigitSpace ds(K);
    std::vector<QCand> frontier;
    frontier.push_back(QCand{std::vector<FElem>((size_t)d, K->zero()), P.b, P.c0});
    bool lossy = frontier_cap > 0;
    size_t cap = lossy ? frontier_cap : kSearchCap;

    for (long level = 1; level <= kmax && out.size() < max_out; ++level) {
        FElem piL = K->pi_pow(level - 1);
        std::vector<QCand> next;
        std::vector<QuadSolution> certified_here;
        bool exact_found = false;

        // recursive single-coordinate digit assignment with incremental updates
        std::function<void(int, QCand&)> extend = [&](int coord, QCand& cur) {
            if (exact_found && !exhaustive) return;
            if (coord == d) {
                if (K->is_zero(cur.f)) {
                    out.push_back({cur.z, true, 0});
                    exact_found = true;
                    return;
                }
                long vf = K->valuation(cur.f);
                if (vf < level) return;
                long c = level;
                for (const auto& gi : cur.g)
                    if (!K->is_zero(gi)) c = std::min(c, K->valuation(gi));
                if (c < level && vf >= 2 * c + 1) {
                    QuadSolution s{cur.z, false, vf};
                    qp_refine(P, s.z, refine_depth);
                    FElem fr = qp_value(P, s.z);
                    s.exact = K->is_zero(fr);
                    s.flevel = s.exact ? refine_depth : K->valuation(fr);
                    certified_here.push_back(std::move(s));
                    if (!exhaustive) return;
                }
                if (lossy) {
                    if (next.size() < cap) next.push_back(cur);
                } else {
                    next.push_back(cur);
                    if (next.size() > kSearchCap)
                        fail("Unsupported", "quadratic digit search exceeded the desk-scale cap");
                }
                return;
            }
            // digit 0 first (no change), then the others
            extend(coord + 1, cur);
            FElem z0 = cur.z[(size_t)coord];
            std::vector<FElem> g0 = cur.g;
            FElem f0 = cur.f;
            for (size_t di = 1; di < ds.digits.size(); ++di) {
                if (exact_found && !exhaustive) return;
                FElem step = K->mul(ds.digits[di], piL);
                cur.z[(size_t)coord] = K->add(z0, step);
                // f += 2 step g0_coord + step^2 A_cc ; g += step A[:,coord]
                FElem t = K->mul(step, g0[(size_t)coord]);
                cur.f = K->add(f0, K->add(t, t));
                cur.f = K->add(cur.f, K->mul(K->mul(step, step), P.A.at(coord, coord)));
                for (int r = 0; r < d; ++r) cur.g[(size_t)r] = K->add(g0[(size_t)r], K->mul(step, P.A.at(r, coord)));
                extend(coord + 1, cur);
            }
            cur.z[(size_t)coord] = z0;
            cur.g = std::move(g0);
            cur.f = f0;
        };

        for (auto& base : frontier) {
            QCand work = base;
            extend(0, work);
            if (!lossy && next.size() > kSearchCap)
                fail("Unsupported", "quadratic digit search exceeded the desk-scale cap");
            if (exact_found && !exhaustive) break;
        }
        for (auto& s : certified_here) {
            if (out.size() >= max_out) break;
            out.push_back(std::move(s));
        }
        if (!out.empty() && !exhaustive) return out;
        frontier = std::move(next);
        if (frontier.empty()) return out;
    }
    if (exhaustive && out.size() < max_out) {
        for (auto& c : frontier) {
            if (out.size() >= max_out) break;
            out.push_back({c.z, false, kmax});
        }
    }
    return out;
}

// ----------------------------------------------------------------------
// integral affine solve P v = y over the valuation ring

struct AffineSolution {
    std::vector<FElem> v0;  // integral particular solution
    Mat W;                  // integral kernel basis, columns primitive
};

std::optional<AffineSolution> dvr_affine_solve(const FieldPtr& K, const std::vector<std::vector<FElem>>& rows,
                                               const std::vector<FElem>& y, int n) {
    int c = (int)rows.size();
    Mat A = mat_make(K, c, n);
    for (int i = 0; i < c; ++i)
        for (int j = 0; j < n; ++j) A.at(i, j) = rows[i][j];
    Mat V = mat_identity(K, n);
    std::vector<int> pivot_col_of_row(c, -1);
    int npiv = 0;
    for (int r = 0; r < c; ++r) {
        // minimal-valuation pivot among columns not yet used
        int bj = -1;
        long bv = 0;
        for (int j = npiv; j < n; ++j) {
            if (K->is_zero(A.at(r, j))) continue;
            long v = K->valuation(A.at(r, j));
            if (bj < 0 || v < bv) bj = j, bv = v;
        }
        if (bj < 0) continue;  // row constrains only earlier pivots
        if (bj != npiv) {
            for (int i = 0; i < c; ++i) std::swap(A.at(i, bj), A.at(i, npiv));
            for (int i = 0; i < n; ++i) std::swap(V.at(i, bj), V.at(i, npiv));
        }
        FElem p = A.at(r, npiv);
        FElem pinv = K->inv(p);
        for (int j = npiv + 1; j < n; ++j) {
            if (K->is_zero(A.at(r, j))) continue;
            FElem q = K->mul(A.at(r, j), pinv);  // integral: pivot has minimal valuation
            for (int i = 0; i < c; ++i) A.at(i, j) = K->sub(A.at(i, j), K->mul(q, A.at(i, npiv)));
            for (int i = 0; i < n; ++i) V.at(i, j) = K->sub(V.at(i, j), K->mul(q, V.at(i, npiv)));
        }
        pivot_col_of_row[r] = npiv;
        ++npiv;
    }
    // forward substitution in the triangular system A z = y
    std::vector<FElem> z((size_t)n, K->zero());
    for (int r = 0; r < c; ++r) {
        FElem rhs = y[r];
        for (int j = 0; j < npiv; ++j)
            if (j != pivot_col_of_row[r] && !K->is_zero(A.at(r, j)))
                rhs = K->sub(rhs, K->mul(A.at(r, j), z[j]));
        if (pivot_col_of_row[r] < 0) {
            if (!K->is_zero(rhs)) return std::nullopt;
            continue;
        }
        FElem zr = K->div(rhs, A.at(r, pivot_col_of_row[r]));
        if (!is_integral(K, zr)) return std::nullopt;
        z[pivot_col_of_row[r]] = zr;
    }
    AffineSolution sol;
    sol.v0 = mat_apply(V, z);
    sol.W = mat_make(K, n, n - npiv);
    for (int j = npiv; j < n; ++j)
        for (int i = 0; i < n; ++i) sol.W.at(i, j - npiv) = V.at(i, j);
    // exactness checks keep subtle pivoting bugs loud
    for (int r = 0; r < c; ++r) {
        FElem acc = K->zero();
        for (int j = 0; j < n; ++j) acc = K->add(acc, K->mul(rows[r][j], sol.v0[j]));
        if (!K->eq(acc, y[r])) fail("Internal", "affine solve verification failed");
        for (int j = 0; j < sol.W.cols; ++j) {
            FElem kk = K->zero();
            for (int i = 0; i < n; ++i) kk = K->add(kk, K->mul(rows[r][i], sol.W.at(i, j)));
            if (!K->is_zero(kk)) fail("Internal", "affine kernel verification failed");
        }
    }
    return sol;
}

}  // namespace

std::optional<VectorWitness> find_vector(const QuadLattice& M, const FElem& a) {
    const FieldPtr& K = M.K;
    if (K->is_zero(a)) fail("ZeroTarget", "find_vector target must be nonzero");
    int n = M.rank();
    long shift = integral_shift(M, {a});
    FElem sfac = K->pi_pow(2 * shift);
    Mat G = M.gram;
    for (auto& x : G.a) x = K->mul(sfac, x);
    FElem aa = K->mul(sfac, a);

    FElem det = mat_det(G);
    long vdet = K->valuation(det);
    long va = K->valuation(aa);
    if (va < 0) return std::nullopt;
    long k_spec = va + K->valuation(K->mul(K->from_long(4), det)) + 1;
    long k_mine = 2 * (va / 2 + vdet) + 1;
    long kmax = std::max({k_spec, k_mine, (long)1});

    QuadProblem P{K, G, std::vector<FElem>((size_t)n, K->zero()), K->neg(aa)};
    auto sols = quad_solve(P, kmax, kmax + 2, 1, false);
    if (sols.empty()) return std::nullopt;
    return VectorWitness{sols.front().z, sols.front().exact, sols.front().exact ? 0 : sols.front().flevel};
}

namespace {

bool all_integral(const FieldPtr& K, const std::vector<FElem>& v) {
    for (const auto& x : v)
        if (!is_integral(K, x)) return false;
    return true;
}

// greedy exact construction: diagonalize N, pull exact vectors, split off
// when the found vector spans a direct summand
std::optional<EmbeddingWitness> find_embedding_exact_greedy(const QuadLattice& N, const QuadLattice& M) {
    const FieldPtr& K = N.K;
    if (N.rank() == 0) return EmbeddingWitness{mat_make(K, M.rank(), 0), true, 0};
    Diagonalization DN = diagonalize(N.space());
    if (!all_integral(K, DN.basis.a)) return std::nullopt;
    if (K->valuation(mat_det(DN.basis)) != 0) return std::nullopt;

    QuadLattice cur = M;
    Mat curbasis = mat_identity(K, M.rank());
    std::vector<std::vector<FElem>> image_cols;
    for (size_t i = 0; i < DN.entries.size(); ++i) {
        auto w = find_vector(cur, DN.entries[i]);
        if (!w || !w->exact) return std::nullopt;
        std::vector<FElem> v_in_M = mat_apply(curbasis, w->v);
        image_cols.push_back(v_in_M);
        if (i + 1 == DN.entries.size()) break;
        // split condition: <v, cur> contained in Q(v) R
        FElem qv = quad_value(cur.gram, w->v);
        long vq = K->valuation(qv);
        bool splits = true;
        for (int j = 0; j < cur.rank() && splits; ++j) {
            std::vector<FElem> e((size_t)cur.rank(), K->zero());
            e[j] = K->one();
            FElem pv = pair_value(cur.gram, e, w->v);
            if (!K->is_zero(pv) && K->valuation(pv) < vq) splits = false;
        }
        if (!splits) return std::nullopt;
        Mat B = orthogonal_complement_basis(cur, w->v);
        curbasis = mat_mul(curbasis, B);
        cur = QuadLattice{K, mat_congruent(B, cur.gram)};
    }
    Mat img = mat_from_cols(K, image_cols);
    Mat T = mat_mul(img, mat_inverse(DN.basis));
    if (!all_integral(K, T.a)) return std::nullopt;
    if (!mat_eq(mat_congruent(T, M.gram), N.gram)) return std::nullopt;
    return EmbeddingWitness{T, true, 0};
}

struct ColumnContext {
    FieldPtr K;
    Mat GM, GN;  // integral
    long klevel = 1;
    long refine_depth = 3;
};

// quadratic problem for column c in the kernel coordinates of the exact
// linear pairing constraints against the chosen columns
std::optional<std::pair<QuadProblem, AffineSolution>> column_problem(
    const ColumnContext& ctx, int c, const std::vector<std::vector<FElem>>& chosen) {
    const FieldPtr& K = ctx.K;
    int n = ctx.GM.rows;
    std::vector<std::vector<FElem>> rows;
    std::vector<FElem> y;
    for (int b = 0; b < c; ++b) {
        std::vector<FElem> row((size_t)n, K->zero());
        for (int j = 0; j < n; ++j) {
            FElem acc = K->zero();
            for (int i = 0; i < n; ++i) acc = K->add(acc, K->mul(chosen[b][i], ctx.GM.at(i, j)));
            row[j] = acc;
        }
        rows.push_back(std::move(row));
        y.push_back(ctx.GN.at(b, c));
    }
    auto aff = dvr_affine_solve(K, rows, y, n);
    if (!aff) return std::nullopt;
    const Mat& W = aff->W;
    QuadProblem P;
    P.K = K;
    P.A = mat_congruent(W, ctx.GM);
    P.b.assign((size_t)W.cols, K->zero());
    for (int j = 0; j < W.cols; ++j) {
        FElem acc = K->zero();
        for (int i = 0; i < n; ++i)
            for (int t = 0; t < n; ++t) acc = K->add(acc, K->mul(aff->v0[i], K->mul(ctx.GM.at(i, t), W.at(t, j))));
        P.b[j] = acc;
    }
    P.c0 = K->sub(quad_value(ctx.GM, aff->v0), ctx.GN.at(c, c));
    return std::make_pair(std::move(P), std::move(*aff));
}

std::optional<Mat> embedding_column_dfs(const ColumnContext& ctx, int m, bool exhaustive) {
    const FieldPtr& K = ctx.K;
    std::vector<std::vector<FElem>> chosen;
    struct Frame {
        std::vector<QuadSolution> cands;
        AffineSolution aff;
        size_t next = 0;
    };
    std::vector<Frame> stack;
    auto make_frame = [&](int c) -> std::optional<Frame> {
        auto pb = column_problem(ctx, c, chosen);
        if (!pb) return std::nullopt;
        size_t want = exhaustive ? kSearchCap : 24;
        auto sols = quad_solve(pb->first, ctx.klevel, ctx.refine_depth, want, exhaustive);
        if (sols.empty()) return std::nullopt;
        return Frame{std::move(sols), std::move(pb->second), 0};
    };
    if (auto f0 = make_frame(0)) {
        stack.push_back(std::move(*f0));
    } else {
        return std::nullopt;
    }
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next >= f.cands.size()) {
            stack.pop_back();
            if (!chosen.empty()) chosen.pop_back();
            continue;
        }
        const QuadSolution& s = f.cands[f.next++];
        std::vector<FElem> col = f.aff.v0;
        for (int i = 0; i < (int)col.size(); ++i)
            for (int j = 0; j < f.aff.W.cols; ++j)
                col[i] = K->add(col[i], K->mul(f.aff.W.at(i, j), s.z[j]));
        chosen.push_back(std::move(col));
        if ((int)chosen.size() == m) return mat_from_cols(K, chosen);
        if (auto fn = make_frame((int)chosen.size())) {
            stack.push_back(std::move(*fn));
        } else {
            chosen.pop_back();
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<EmbeddingWitness> find_embedding(const QuadLattice& N, const QuadLattice& M) {
    if (!same_field(N.K, M.K)) fail("RingMismatch", "embedding over different rings");
    const FieldPtr& K = N.K;
    if (!omeara_embeds(N, M)) return std::nullopt;
    if (auto g = find_embedding_exact_greedy(N, M)) return g;

    int m = N.rank();
    long shift = integral_shift(M, N.gram.a);
    FElem sfac = K->pi_pow(2 * shift);
    ColumnContext ctx;
    ctx.K = K;
    ctx.GM = M.gram;
    ctx.GN = N.gram;
    for (auto& x : ctx.GM.a) x = K->mul(sfac, x);
    for (auto& x : ctx.GN.a) x = K->mul(sfac, x);

    Mat GNinv = mat_inverse(ctx.GN);
    long d0 = 0;
    for (const auto& x : GNinv.a)
        if (!K->is_zero(x)) d0 = std::max(d0, -K->valuation(x));
    ctx.klevel = 2 * d0 + 1;
    ctx.refine_depth = ctx.klevel + 2;

    std::optional<Mat> T = embedding_column_dfs(ctx, m, false);
    if (!T) T = embedding_column_dfs(ctx, m, true);
    if (!T) fail("Internal", "criterion asserts embeddability but the certified search found no witness");

    // matrix Newton polish: T <- T - T GN^{-1} f(T) / 2 while it helps
    auto residual = [&](const Mat& X) { return mat_sub(mat_congruent(X, ctx.GM), ctx.GN); };
    Mat f = residual(*T);
    for (int it = 0; it < 3 && !mat_is_zero(f); ++it) {
        long lvl = ctx.klevel + 8;
        for (const auto& x : f.a)
            if (!K->is_zero(x)) lvl = std::min(lvl, K->valuation(x));
        if (lvl >= ctx.klevel + 8) break;
        Mat half = mat_mul(*T, mat_mul(GNinv, f));
        FElem two_inv = K->inv(K->from_long(2));
        for (auto& x : half.a) x = K->mul(two_inv, x);
        *T = mat_sub(*T, half);
        f = residual(*T);
    }
    if (mat_is_zero(f)) return EmbeddingWitness{*T, true, 0};
    long lvl = ctx.klevel + 8;
    for (const auto& x : f.a)
        if (!K->is_zero(x)) lvl = std::min(lvl, K->valuation(x));
    return EmbeddingWitness{*T, false, lvl};
}

QuadLattice base_change_lattice(const QuadLattice& M, const ExtensionTower& t) {
    if (!same_field(M.K, t.base)) fail("RingMismatch", "lattice is not over the tower's base");
    Mat G = mat_make(t.top, M.rank(), M.rank());
    for (int i = 0; i < M.rank(); ++i)
        for (int j = 0; j < M.rank(); ++j) G.at(i, j) = t.top->embed(M.gram.at(i, j));
    return QuadLattice{t.top, std::move(G)};
}

SpringerReport springer_verify(const QuadLattice& N, const QuadLattice& M, const ExtensionTower& t) {
    SpringerReport r;
    r.embeds_base = omeara_embeds(N, M);
    r.embeds_ext = omeara_embeds(base_change_lattice(N, t), base_change_lattice(M, t));
    r.degree_odd = (t.degree() % 2) == 1;
    r.consistent = !r.degree_odd || (r.embeds_base == r.embeds_ext);
    return r;
}

}  // namespace qlat
