#include "qlat/lattice.hpp"

#include <algorithm>
#include <cassert>

namespace qlat {

// ---------------------------------------------------------------- Mat

Mat mat_make(const FieldPtr& K, int r, int c) {
    Mat m;
    m.K = K;
    m.rows = r;
    m.cols = c;
    m.a.assign((size_t)r * c, K->zero());
    return m;
}

Mat mat_identity(const FieldPtr& K, int n) {
    Mat m = mat_make(K, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = K->one();
    return m;
}

Mat mat_mul(const Mat& A, const Mat& B) {
    const FieldPtr& K = A.K;
    Mat R = mat_make(K, A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            if (K->is_zero(A.at(i, k))) continue;
            for (int j = 0; j < B.cols; ++j)
                R.at(i, j) = K->add(R.at(i, j), K->mul(A.at(i, k), B.at(k, j)));
        }
    return R;
}

Mat mat_transpose(const Mat& A) {
    Mat R = mat_make(A.K, A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) R.at(j, i) = A.at(i, j);
    return R;
}

Mat mat_sub(const Mat& A, const Mat& B) {
    Mat R = mat_make(A.K, A.rows, A.cols);
    for (size_t i = 0; i < A.a.size(); ++i) R.a[i] = A.K->sub(A.a[i], B.a[i]);
    return R;
}

FElem mat_det(const Mat& A) {
    const FieldPtr& K = A.K;
    int n = A.rows;
    Mat M = A;
    FElem det = K->one();
    bool neg = false;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!K->is_zero(M.at(r, col))) { piv = r; break; }
        if (piv < 0) return K->zero();
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(M.at(piv, c), M.at(col, c));
            neg = !neg;
        }
        det = K->mul(det, M.at(col, col));
        FElem pinv = K->inv(M.at(col, col));
        for (int r = col + 1; r < n; ++r) {
            if (K->is_zero(M.at(r, col))) continue;
            FElem f = K->mul(M.at(r, col), pinv);
            for (int c = col; c < n; ++c) M.at(r, c) = K->sub(M.at(r, c), K->mul(f, M.at(col, c)));
        }
    }
    return neg ? K->neg(det) : det;
}

Mat mat_inverse(const Mat& A) {
    const FieldPtr& K = A.K;
    int n = A.rows;
    Mat M = A, I = mat_identity(K, n);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!K->is_zero(M.at(r, col))) { piv = r; break; }
        if (piv < 0) fail("DegenerateLattice", "matrix is singular");
        if (piv != col)
            for (int c = 0; c < n; ++c) {
                std::swap(M.at(piv, c), M.at(col, c));
                std::swap(I.at(piv, c), I.at(col, c));
            }
        FElem pinv = K->inv(M.at(col, col));
        for (int c = 0; c < n; ++c) {
            M.at(col, c) = K->mul(M.at(col, c), pinv);
            I.at(col, c) = K->mul(I.at(col, c), pinv);
        }
        for (int r = 0; r < n; ++r) {
            if (r == col || K->is_zero(M.at(r, col))) continue;
            FElem f = M.at(r, col);
            for (int c = 0; c < n; ++c) {
                M.at(r, c) = K->sub(M.at(r, c), K->mul(f, M.at(col, c)));
                I.at(r, c) = K->sub(I.at(r, c), K->mul(f, I.at(col, c)));
            }
        }
    }
    return I;
}

Mat mat_congruent(const Mat& T, const Mat& G) { return mat_mul(mat_transpose(T), mat_mul(G, T)); }

bool mat_is_zero(const Mat& A) {
    for (const auto& x : A.a)
        if (!A.K->is_zero(x)) return false;
    return true;
}

bool mat_eq(const Mat& A, const Mat& B) {
    if (A.rows != B.rows || A.cols != B.cols) return false;
    return mat_is_zero(mat_sub(A, B));
}

std::vector<FElem> mat_apply(const Mat& A, const std::vector<FElem>& v) {
    const FieldPtr& K = A.K;
    std::vector<FElem> r((size_t)A.rows, K->zero());
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) r[i] = K->add(r[i], K->mul(A.at(i, j), v[j]));
    return r;
}

Mat mat_from_cols(const FieldPtr& K, const std::vector<std::vector<FElem>>& cols) {
    int n = cols.empty() ? 0 : (int)cols[0].size();
    Mat R = mat_make(K, n, (int)cols.size());
    for (int j = 0; j < (int)cols.size(); ++j)
        for (int i = 0; i < n; ++i) R.at(i, j) = cols[j][i];
    return R;
}

std::vector<FElem> mat_col(const Mat& A, int j) {
    std::vector<FElem> c;
    c.reserve(A.rows);
    for (int i = 0; i < A.rows; ++i) c.push_back(A.at(i, j));
    return c;
}

FElem quad_value(const Mat& G, const std::vector<FElem>& v) { return pair_value(G, v, v); }

FElem pair_value(const Mat& G, const std::vector<FElem>& u, const std::vector<FElem>& v) {
    const FieldPtr& K = G.K;
    FElem acc = K->zero();
    for (int i = 0; i < G.rows; ++i) {
        if (K->is_zero(u[i])) continue;
        FElem row = K->zero();
        for (int j = 0; j < G.cols; ++j) row = K->add(row, K->mul(G.at(i, j), v[j]));
        acc = K->add(acc, K->mul(u[i], row));
    }
    return acc;
}

// ---------------------------------------------------------------- QuadSpace

namespace {
void check_symmetric(const Mat& G, const char* what) {
    for (int i = 0; i < G.rows; ++i)
        for (int j = i + 1; j < G.cols; ++j)
            if (!G.K->eq(G.at(i, j), G.at(j, i))) fail("MalformedInput", std::string(what) + ": gram matrix not symmetric");
}
}  // namespace

QuadSpace make_space(const FieldPtr& K, Mat gram) {
    if (gram.rows != gram.cols) fail("MalformedInput", "space: gram matrix not square");
    check_symmetric(gram, "space");
    if (gram.rows > 0 && K->is_zero(mat_det(gram))) fail("DegenerateSpace", "space: zero determinant");
    return QuadSpace{K, std::move(gram)};
}

QuadSpace space_from_diag(const FieldPtr& K, const std::vector<FElem>& d) {
    Mat G = mat_make(K, (int)d.size(), (int)d.size());
    for (int i = 0; i < (int)d.size(); ++i) G.at(i, i) = d[i];
    return make_space(K, std::move(G));
}

QuadSpace space_orth_sum(const QuadSpace& a, const QuadSpace& b) {
    if (!same_field(a.K, b.K)) fail("FieldMismatch", "orthogonal sum over different fields");
    int n = a.dim() + b.dim();
    Mat G = mat_make(a.K, n, n);
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) G.at(i, j) = a.gram.at(i, j);
    for (int i = 0; i < b.dim(); ++i)
        for (int j = 0; j < b.dim(); ++j) G.at(a.dim() + i, a.dim() + j) = b.gram.at(i, j);
    return QuadSpace{a.K, std::move(G)};
}

Diagonalization diagonalize(const QuadSpace& V) {
    const FieldPtr& K = V.K;
    const Mat& G = V.gram;
    int n = V.dim();
    std::vector<std::vector<FElem>> cols;
    for (int j = 0; j < n; ++j) {
        std::vector<FElem> e((size_t)n, K->zero());
        e[j] = K->one();
        cols.push_back(std::move(e));
    }
    std::vector<FElem> entries;
    for (int k = 0; k < n; ++k) {
        int pick = -1;
        for (int j = k; j < n; ++j)
            if (!K->is_zero(quad_value(G, cols[j]))) { pick = j; break; }
        if (pick < 0) {
            // all diagonal zero: some pairing is nonzero by non-degeneracy
            bool fixed = false;
            for (int i = k; i < n && !fixed; ++i)
                for (int j = i + 1; j < n && !fixed; ++j)
                    if (!K->is_zero(pair_value(G, cols[i], cols[j]))) {
                        for (int t = 0; t < n; ++t) cols[i][t] = K->add(cols[i][t], cols[j][t]);
                        pick = i;
                        fixed = true;
                    }
            if (!fixed) fail("DegenerateSpace", "diagonalization of a degenerate space");
        }
        std::swap(cols[k], cols[(size_t)pick]);
        FElem qk = quad_value(G, cols[k]);
        FElem qinv = K->inv(qk);
        for (int j = k + 1; j < n; ++j) {
            FElem c = K->mul(pair_value(G, cols[j], cols[k]), qinv);
            if (K->is_zero(c)) continue;
            for (int t = 0; t < n; ++t) cols[j][t] = K->sub(cols[j][t], K->mul(c, cols[k][t]));
        }
        entries.push_back(qk);
    }
    return Diagonalization{std::move(entries), mat_from_cols(K, cols)};
}

SpaceInvariants invariants(const QuadSpace& V) {
    const FieldPtr& K = V.K;
    SpaceInvariants inv;
    inv.dim = V.dim();
    inv.det_class = sc_one();
    inv.hasse = 1;
    if (V.dim() == 0) return inv;
    Diagonalization D = diagonalize(V);
    for (const auto& d : D.entries) inv.det_class = sc_mul(inv.det_class, K->square_class(d));
    for (size_t i = 0; i < D.entries.size(); ++i)
        for (size_t j = i + 1; j < D.entries.size(); ++j) inv.hasse *= K->hilbert(D.entries[i], D.entries[j]);
    return inv;
}

bool is_isotropic(const QuadSpace& V) {
    const FieldPtr& K = V.K;
    int n = V.dim();
    if (n <= 1) return false;
    if (n >= 5) return true;
    SpaceInvariants inv = invariants(V);
    SquareClass m1 = K->square_class(K->from_long(-1));
    if (n == 2) return sc_mul(inv.det_class, m1) == sc_one();  // -det a square
    if (n == 3) {
        // isotropic iff hasse = (-1, -det)
        FElem md = K->mul(K->from_long(-1), K->class_rep(inv.det_class));
        return inv.hasse == K->hilbert(K->from_long(-1), md);
    }
    // n == 4: anisotropic iff det is a square and hasse = -(-1,-1)
    int h11 = K->hilbert(K->from_long(-1), K->from_long(-1));
    return !(inv.det_class == sc_one() && inv.hasse == -h11);
}

bool is_isometric_space(const QuadSpace& V, const QuadSpace& W) {
    if (!same_field(V.K, W.K)) fail("FieldMismatch", "isometry test over different fields");
    return invariants(V) == invariants(W);
}

std::optional<QuadSpace> space_from_invariants(const FieldPtr& K, const SpaceInvariants& inv) {
    if (inv.dim == 0) {
        if (inv.det_class == sc_one() && inv.hasse == 1) return QuadSpace{K, mat_make(K, 0, 0)};
        return std::nullopt;
    }
    if (inv.dim == 1) {
        if (inv.hasse != 1) return std::nullopt;
        return space_from_diag(K, {K->class_rep(inv.det_class)});
    }
    if (inv.dim == 2) {
        for (uint8_t ab = 0; ab < 4; ++ab) {
            SquareClass a{ab};
            SquareClass b = sc_mul(inv.det_class, a);
            FElem ea = K->class_rep(a), eb = K->class_rep(b);
            if (K->hilbert(ea, eb) == inv.hasse) return space_from_diag(K, {ea, eb});
        }
        return std::nullopt;
    }
    // dim >= 3: pad with <1,...,1> in front of a ternary tail
    for (uint8_t ab = 0; ab < 4; ++ab)
        for (uint8_t bb = 0; bb < 4; ++bb)
            for (uint8_t cb = 0; cb < 4; ++cb) {
                SquareClass a{ab}, b{bb}, c{cb};
                if (!(sc_mul(sc_mul(a, b), c) == inv.det_class)) continue;
                FElem ea = K->class_rep(a), eb = K->class_rep(b), ec = K->class_rep(c);
                int h = K->hilbert(ea, eb) * K->hilbert(ea, ec) * K->hilbert(eb, ec);
                if (h != inv.hasse) continue;
                std::vector<FElem> d((size_t)inv.dim - 3, K->one());
                d.push_back(ea);
                d.push_back(eb);
                d.push_back(ec);
                return space_from_diag(K, d);
            }
    return std::nullopt;  // unreachable for dim >= 3
}

bool represents_space(const QuadSpace& V, const QuadSpace& W) {
    if (!same_field(V.K, W.K)) fail("FieldMismatch", "representation test over different fields");
    if (W.dim() > V.dim()) fail("DimensionOrder", "represented space has larger dimension");
    if (W.dim() == V.dim()) return is_isometric_space(V, W);
    int du = V.dim() - W.dim();
    for (uint8_t db = 0; db < 4; ++db)
        for (int h = 1; h >= -1; h -= 2) {
            SpaceInvariants want{du, SquareClass{db}, h};
            auto U = space_from_invariants(V.K, want);
            if (!U) continue;
            if (is_isometric_space(V, space_orth_sum(W, *U))) return true;
        }
    return false;
}

QuadSpace base_change_space(const QuadSpace& V, const ExtensionTower& t) {
    if (!same_field(V.K, t.base)) fail("FieldMismatch", "space is not over the tower's base");
    Mat G = mat_make(t.top, V.dim(), V.dim());
    for (int i = 0; i < V.dim(); ++i)
        for (int j = 0; j < V.dim(); ++j) G.at(i, j) = t.top->embed(V.gram.at(i, j));
    return QuadSpace{t.top, std::move(G)};
}

// ---------------------------------------------------------------- QuadLattice

QuadLattice make_lattice(const FieldPtr& K, Mat gram) {
    if (gram.rows != gram.cols) fail("MalformedInput", "lattice: gram matrix not square");
    check_symmetric(gram, "lattice");
    if (gram.rows > 0 && K->is_zero(mat_det(gram))) fail("DegenerateLattice", "lattice: zero determinant");
    return QuadLattice{K, std::move(gram)};
}

long scale_exp(const QuadLattice& L) {
    const FieldPtr& K = L.K;
    if (L.rank() == 0) fail("DegenerateLattice", "scale of a rank-0 lattice");
    bool first = true;
    long m = 0;
    for (const auto& x : L.gram.a) {
        if (K->is_zero(x)) continue;
        long v = K->valuation(x);
        if (first || v < m) m = v, first = false;
    }
    if (first) fail("DegenerateLattice", "zero gram matrix");
    return m;
}

QuadLattice dual(const QuadLattice& L) { return QuadLattice{L.K, mat_inverse(L.gram)}; }

QuadLattice rescale(const QuadLattice& L, long k) {
    const FieldPtr& K = L.K;
    FElem f = K->pi_pow(2 * k);
    Mat G = L.gram;
    for (auto& x : G.a) x = K->mul(f, x);
    return QuadLattice{K, std::move(G)};
}

bool is_modular(const QuadLattice& L) {
    const FieldPtr& K = L.K;
    long s = scale_exp(L);
    FElem det = mat_det(L.gram);
    return K->valuation(det) == (long)L.rank() * s;
}

JordanSplitting jordan_split(const QuadLattice& L) {
    const FieldPtr& K = L.K;
    const Mat& G = L.gram;
    int n = L.rank();
    if (n == 0) fail("DegenerateLattice", "jordan splitting of a rank-0 lattice");

    struct Blk {
        long s;
        std::vector<std::vector<FElem>> cols;
    };
    std::vector<Blk> blocks;
    std::vector<std::vector<FElem>> work;
    for (int j = 0; j < n; ++j) {
        std::vector<FElem> e((size_t)n, K->zero());
        e[j] = K->one();
        work.push_back(std::move(e));
    }

    while (!work.empty()) {
        int m = (int)work.size();
        // minimal valuation over pairings; prefer a diagonal entry, then lowest indices
        long best = 0;
        int bi = -1, bj = -1;
        bool havebest = false;
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                FElem pv = pair_value(G, work[i], work[j]);
                if (K->is_zero(pv)) continue;
                long v = K->valuation(pv);
                bool better = false;
                if (!havebest || v < best) {
                    better = true;
                } else if (v == best) {
                    bool cur_diag = (bi == bj), new_diag = (i == j);
                    if (new_diag && !cur_diag) better = true;
                }
                if (better) best = v, bi = i, bj = j, havebest = true;
            }
        if (!havebest) fail("DegenerateLattice", "jordan split: degenerate block");

        if (bi == bj) {
            std::swap(work[0], work[(size_t)bi]);
            FElem q = quad_value(G, work[0]);
            FElem qinv = K->inv(q);
            for (int j = 1; j < m; ++j) {
                FElem c = K->mul(pair_value(G, work[j], work[0]), qinv);
                if (K->is_zero(c)) continue;
                for (int t = 0; t < n; ++t) work[j][t] = K->sub(work[j][t], K->mul(c, work[0][t]));
            }
            blocks.push_back(Blk{best, {work[0]}});
            work.erase(work.begin());
        } else {
            std::swap(work[0], work[(size_t)bi]);
            std::swap(work[1], work[(size_t)bj]);
            FElem q1 = quad_value(G, work[0]);
            FElem q2 = quad_value(G, work[1]);
            FElem pr = pair_value(G, work[0], work[1]);
            // P = [[q1, pr], [pr, q2]], invert exactly
            FElem detP = K->sub(K->mul(q1, q2), K->mul(pr, pr));
            FElem di = K->inv(detP);
            for (int j = 2; j < m; ++j) {
                FElem r1 = pair_value(G, work[j], work[0]);
                FElem r2 = pair_value(G, work[j], work[1]);
                FElem al = K->mul(di, K->sub(K->mul(q2, r1), K->mul(pr, r2)));
                FElem be = K->mul(di, K->sub(K->mul(q1, r2), K->mul(pr, r1)));
                for (int t = 0; t < n; ++t) {
                    FElem corr = K->add(K->mul(al, work[0][t]), K->mul(be, work[1][t]));
                    work[j][t] = K->sub(work[j][t], corr);
                }
            }
            blocks.push_back(Blk{best, {work[0], work[1]}});
            work.erase(work.begin(), work.begin() + 2);
        }
    }

    std::stable_sort(blocks.begin(), blocks.end(), [](const Blk& a, const Blk& b) { return a.s < b.s; });

    JordanSplitting J;
    J.K = K;
    std::vector<std::vector<FElem>> allcols;
    size_t idx = 0;
    while (idx < blocks.size()) {
        size_t end = idx;
        while (end < blocks.size() && blocks[end].s == blocks[idx].s) ++end;
        JordanComponent comp;
        comp.s = blocks[idx].s;
        std::vector<std::vector<FElem>> cols;
        std::vector<std::pair<int, int>> twoblocks;  // index ranges of 2x2 blocks
        for (size_t b = idx; b < end; ++b) {
            if (blocks[b].cols.size() == 2) twoblocks.push_back({(int)cols.size(), (int)cols.size() + 1});
            for (auto& c : blocks[b].cols) cols.push_back(c);
        }
        comp.basis = mat_from_cols(K, cols);
        comp.gram = mat_congruent(comp.basis, G);
        // norm generator: first diagonal entry achieving the scale, else the
        // e_i + e_j vector of a 2x2 block (all of whose diagonal entries sit
        // above the scale)
        bool found = false;
        for (int j = 0; j < (int)cols.size() && !found; ++j) {
            FElem q = comp.gram.at(j, j);
            if (!K->is_zero(q) && K->valuation(q) == comp.s) {
                comp.norm_gen = cols[j];
                comp.norm_class = K->square_class(q);
                found = true;
            }
        }
        if (!found) {
            for (auto& tb : twoblocks) {
                std::vector<FElem> x((size_t)n, K->zero());
                for (int t = 0; t < n; ++t) x[t] = K->add(cols[tb.first][t], cols[tb.second][t]);
                FElem q = quad_value(G, x);
                if (!K->is_zero(q) && K->valuation(q) == comp.s) {
                    comp.norm_gen = x;
                    comp.norm_class = K->square_class(q);
                    found = true;
                    break;
                }
            }
        }
        if (!found) fail("Internal", "jordan split: no norm generator found");
        for (auto& c : cols) allcols.push_back(std::move(c));
        J.comps.push_back(std::move(comp));
        idx = end;
    }
    J.transition = mat_from_cols(K, allcols);
    return J;
}

bool is_isometric_lattice(const QuadLattice& L, const QuadLattice& Kl) {
    if (!same_field(L.K, Kl.K)) fail("RingMismatch", "lattice isometry test over different rings");
    if (L.rank() != Kl.rank()) return false;
    if (L.rank() == 0) return true;
    JordanSplitting a = jordan_split(L), b = jordan_split(Kl);
    if (a.comps.size() != b.comps.size()) return false;
    for (size_t i = 0; i < a.comps.size(); ++i) {
        const auto& ca = a.comps[i];
        const auto& cb = b.comps[i];
        if (ca.s != cb.s || ca.gram.rows != cb.gram.rows) return false;
        QuadSpace va{L.K, ca.gram}, vb{L.K, cb.gram};
        if (!(invariants(va) == invariants(vb))) return false;
    }
    return true;
}

// ---------------------------------------------------------------- isometries

Isometry make_isometry(const QuadSpace& V, Mat m) {
    if (!mat_eq(mat_congruent(m, V.gram), V.gram)) fail("NotIsometry", "matrix does not preserve the form");
    FElem d = mat_det(m);
    const FieldPtr& K = V.K;
    int sign;
    if (K->eq(d, K->one()))
        sign = 1;
    else if (K->eq(d, K->from_long(-1)))
        sign = -1;
    else
        fail("NotIsometry", "isometry determinant is not +-1");
    return Isometry{std::move(m), sign};
}

Isometry reflection(const std::vector<FElem>& u, const QuadSpace& V) {
    const FieldPtr& K = V.K;
    FElem qu = quad_value(V.gram, u);
    if (K->is_zero(qu)) fail("IsotropicVector", "reflection along an isotropic vector");
    int n = V.dim();
    Mat m = mat_make(K, n, n);
    FElem qinv = K->inv(qu);
    for (int j = 0; j < n; ++j) {
        std::vector<FElem> e((size_t)n, K->zero());
        e[j] = K->one();
        FElem c = K->mul(K->add(pair_value(V.gram, e, u), pair_value(V.gram, e, u)), qinv);
        for (int i = 0; i < n; ++i) m.at(i, j) = K->sub(e[i], K->mul(c, u[i]));
    }
    return Isometry{std::move(m), -1};
}

Isometry isometry_compose(const QuadSpace& V, const Isometry& a, const Isometry& b) {
    (void)V;
    return Isometry{mat_mul(a.m, b.m), a.det_sign * b.det_sign};
}

SquareClass spinor_norm(const Isometry& s, const QuadSpace& V) {
    const FieldPtr& K = V.K;
    if (!mat_eq(mat_congruent(s.m, V.gram), V.gram)) fail("NotIsometry", "spinor norm of a non-isometry");
    Diagonalization D = diagonalize(V);
    Mat cur = s.m;
    SquareClass acc = sc_one();
    int refl_count = 0;
    auto apply_refl = [&](const std::vector<FElem>& u) {
        Isometry t = reflection(u, V);
        cur = mat_mul(t.m, cur);
        acc = sc_mul(acc, K->square_class(quad_value(V.gram, u)));
        ++refl_count;
    };
    int n = V.dim();
    for (int i = 0; i < n; ++i) {
        std::vector<FElem> v = mat_col(D.basis, i);
        std::vector<FElem> sv = mat_apply(cur, v);
        std::vector<FElem> w((size_t)n, K->zero());
        bool moved = false;
        for (int t = 0; t < n; ++t) {
            w[t] = K->sub(sv[t], v[t]);
            if (!K->is_zero(w[t])) moved = true;
        }
        if (!moved) continue;
        if (!K->is_zero(quad_value(V.gram, w))) {
            apply_refl(w);
        } else {
            std::vector<FElem> w2((size_t)n, K->zero());
            for (int t = 0; t < n; ++t) w2[t] = K->add(sv[t], v[t]);
            apply_refl(w2);  // sends sv to -v
            apply_refl(v);   // sends -v to v
        }
    }
    if (!mat_eq(cur, mat_identity(K, n))) fail("Internal", "reflection factorization did not terminate");
    if (((refl_count & 1) == 0) != (s.det_sign == 1)) fail("Internal", "reflection parity mismatch");
    return acc;
}

// ---------------------------------------------------------------- exact roots

std::optional<FElem> exact_sqrt(const FieldPtr& K, const FElem& x) {
    if (K->is_zero(x)) return K->zero();
    if (K->kind == FKind::Padic) {
        const mpq_class& r = x.rat();
        if (r < 0) return std::nullopt;
        if (!mpz_perfect_square_p(r.get_num().get_mpz_t()) || !mpz_perfect_square_p(r.get_den().get_mpz_t()))
            return std::nullopt;
        mpz_class sn, sd;
        mpz_sqrt(sn.get_mpz_t(), r.get_num().get_mpz_t());
        mpz_sqrt(sd.get_mpz_t(), r.get_den().get_mpz_t());
        return K->from_rat(mpq_class(sn) / mpq_class(sd));
    }
    if (K->kind == FKind::Laurent) {
        auto polysqrt = [&](const FqPoly& f) -> std::optional<FqPoly> {
            if (f.deg() < 0) return fqp_zero(f.F);
            auto lead = f.c.back();
            if (!f.F->is_square(lead)) return std::nullopt;
            auto fac = fqp_factor(f);
            FqPoly r = fqp_const(*f.F->sqrt(lead));
            for (auto& [g, m] : fac) {
                if (m % 2) return std::nullopt;
                for (int i = 0; i < m / 2; ++i) r = fqp_mul(r, g);
            }
            return r;
        };
        auto sn = polysqrt(x.rf().num);
        if (!sn) return std::nullopt;
        auto sd = polysqrt(x.rf().den);
        if (!sd) return std::nullopt;
        return K->from_rf(rf_make(*sn, *sd));
    }
    return std::nullopt;  // tower coordinates: no exact dense-subring root search
}

Mat orthogonal_complement_basis(const QuadLattice& L, const std::vector<FElem>& x) {
    const FieldPtr& K = L.K;
    int n = L.rank();
    std::vector<FElem> w((size_t)n, K->zero());
    for (int i = 0; i < n; ++i) {
        std::vector<FElem> e((size_t)n, K->zero());
        e[i] = K->one();
        w[i] = pair_value(L.gram, e, x);
    }
    long m = 0;
    bool first = true;
    for (const auto& v : w) {
        if (K->is_zero(v)) continue;
        long vv = K->valuation(v);
        if (first || vv < m) m = vv, first = false;
    }
    if (first) fail("DegenerateLattice", "orthogonal complement of a radical vector");
    FElem scalef = K->pi_pow(-m);
    int piv = -1;
    for (int i = 0; i < n; ++i) {
        if (K->is_zero(w[i])) continue;
        w[i] = K->mul(w[i], scalef);
        if (piv < 0 && K->valuation(w[i]) == 0) piv = i;
    }
    if (piv < 0) fail("Internal", "no unit pivot in complement computation");
    FElem pinv = K->inv(w[piv]);
    std::vector<std::vector<FElem>> cols;
    for (int j = 0; j < n; ++j) {
        if (j == piv) continue;
        std::vector<FElem> c((size_t)n, K->zero());
        c[j] = K->one();
        if (!K->is_zero(w[j])) c[piv] = K->neg(K->mul(w[j], pinv));
        cols.push_back(std::move(c));
    }
    return mat_from_cols(K, cols);
}

// ---------------------------------------------------------------- hyperbolic pairs

std::optional<HyperbolicPair> hyperbolic_split(const QuadLattice& L) {
    const FieldPtr& K = L.K;
    if (!is_modular(L)) fail("NotModular", "hyperbolic split requires a modular lattice");
    int n = L.rank();
    long s = scale_exp(L);
    bool iso = is_isotropic(L.space());
    if (!iso) return std::nullopt;

    // orthogonal basis of the lattice with all diagonal values at the scale
    const Mat& G = L.gram;
    std::vector<std::vector<FElem>> cols;
    for (int j = 0; j < n; ++j) {
        std::vector<FElem> e((size_t)n, K->zero());
        e[j] = K->one();
        cols.push_back(std::move(e));
    }
    for (int k = 0; k < n; ++k) {
        long best = 0;
        int bi = -1, bj = -1;
        bool have = false;
        for (int i = k; i < n; ++i)
            for (int j = i; j < n; ++j) {
                FElem pv = pair_value(G, cols[i], cols[j]);
                if (K->is_zero(pv)) continue;
                long v = K->valuation(pv);
                bool better = !have || v < best || (v == best && i == j && bi != bj);
                if (better) best = v, bi = i, bj = j, have = true;
            }
        if (!have) fail("DegenerateLattice", "hyperbolic split: degenerate lattice");
        if (bi != bj) {
            // make a diagonal entry achieve the minimum (2 is a unit)
            for (int t = 0; t < n; ++t) cols[bi][t] = K->add(cols[bi][t], cols[bj][t]);
        }
        std::swap(cols[k], cols[(size_t)bi]);
        FElem q = quad_value(G, cols[k]);
        FElem qinv = K->inv(q);
        for (int j = k + 1; j < n; ++j) {
            FElem c = K->mul(pair_value(G, cols[j], cols[k]), qinv);
            if (K->is_zero(c)) continue;
            for (int t = 0; t < n; ++t) cols[j][t] = K->sub(cols[j][t], K->mul(c, cols[k][t]));
        }
    }
    std::vector<FElem> diag;
    for (int i = 0; i < n; ++i) {
        FElem q = quad_value(G, cols[i]);
        if (K->valuation(q) != s) fail("Internal", "modular lattice has a basis vector off the scale");
        diag.push_back(q);
    }

    // residue form and an isotropic residue vector
    const FqPtr& k = K->kres;
    FElem piS = K->pi_pow(-s);
    std::vector<FqElem> rdiag;
    for (auto& d : diag) rdiag.push_back(K->residue(K->mul(d, piS)));

    std::vector<FqElem> rvec((size_t)n, k->zero());
    bool found = false;
    for (int i = 0; i < n && !found; ++i)
        for (int j = i + 1; j < n && !found; ++j) {
            FqElem ratio = k->neg(k->mul(rdiag[i], k->inv(rdiag[j])));
            if (!k->is_square(ratio)) continue;
            FqElem r = *k->sqrt(ratio);
            rvec.assign((size_t)n, k->zero());
            rvec[i] = k->one();
            rvec[j] = r;
            found = true;
        }
    if (!found && n >= 3) {
        // c0 x^2 + c1 y^2 + c2 = 0 has a solution over a finite field
        for (uint64_t xi = 0; xi < k->q && !found; ++xi) {
            FqElem x = k->element_from_index(xi);
            FqElem rhs = k->neg(k->add(k->mul(rdiag[0], k->mul(x, x)), rdiag[2]));
            FqElem yy = k->mul(rhs, k->inv(rdiag[1]));
            if (yy.is_zero()) {
                rvec.assign((size_t)n, k->zero());
                rvec[0] = x;
                rvec[1] = k->zero();
                rvec[2] = k->one();
                found = true;
            } else if (k->is_square(yy)) {
                rvec.assign((size_t)n, k->zero());
                rvec[0] = x;
                rvec[1] = *k->sqrt(yy);
                rvec[2] = k->one();
                found = true;
            }
        }
    }
    if (!found) fail("Internal", "isotropy decision and residue search disagree");

    // primitive vector with Q below the scale, first coordinate a unit
    int lead = -1;
    for (int i = 0; i < n; ++i)
        if (!rvec[i].is_zero()) { lead = i; break; }
    std::swap(cols[0], cols[(size_t)lead]);
    std::swap(diag[0], diag[(size_t)lead]);
    std::swap(rvec[0], rvec[(size_t)lead]);

    std::vector<FElem> x0((size_t)n, K->zero());
    FElem a1 = K->lift(rvec[0]);
    for (int i = 0; i < n; ++i) {
        FElem ci = K->lift(rvec[i]);
        for (int t = 0; t < n; ++t) x0[t] = K->add(x0[t], K->mul(ci, cols[i][t]));
    }
    FElem qx = quad_value(G, x0);

    auto complete_pair = [&](const std::vector<FElem>& xiso) -> HyperbolicPair {
        // find y with <x, y> of valuation s, then make it isotropic
        int bestj = -1;
        long bv = 0;
        for (int j = 0; j < n; ++j) {
            std::vector<FElem> e((size_t)n, K->zero());
            e[j] = K->one();
            FElem pv = pair_value(G, xiso, e);
            if (K->is_zero(pv)) continue;
            long v = K->valuation(pv);
            if (bestj < 0 || v < bv) bestj = j, bv = v;
        }
        if (bestj < 0 || bv != s) fail("Internal", "isotropic vector is not primitive at the scale");
        std::vector<FElem> y0((size_t)n, K->zero());
        y0[bestj] = K->one();
        FElem pxy = pair_value(G, xiso, y0);
        FElem coef = K->div(quad_value(G, y0), K->add(pxy, pxy));
        std::vector<FElem> y((size_t)n, K->zero());
        for (int t = 0; t < n; ++t) y[t] = K->sub(y0[t], K->mul(coef, xiso[t]));
        HyperbolicPair hp;
        hp.x = xiso;
        hp.y = y;
        hp.exact = true;
        return hp;
    };

    if (K->is_zero(qx)) return complete_pair(x0);

    // Hensel step from the proof of the hyperbolic-splitting criterion:
    // solve  (Q(x)/Q(e1)) xi^2 + 2 a1 xi + 1 = 0  with xi a unit
    FElem c = K->div(qx, diag[0]);
    FElem two = K->from_long(2);
    std::optional<FElem> xi;
    bool exact = false;
    FElem disc = K->sub(K->mul(a1, a1), c);  // quarter discriminant
    if (auto sq = exact_sqrt(K, disc)) {
        // unit root: the one with xi = (-a1 +- sqrt(disc)) / c of valuation 0,
        // equivalently numerator of valuation v(c)
        for (int sgn = 0; sgn < 2; ++sgn) {
            FElem root = sgn ? K->sub(K->neg(a1), *sq) : K->add(K->neg(a1), *sq);
            if (K->is_zero(root)) continue;
            FElem cand = K->div(root, c);
            if (!K->is_zero(cand) && K->valuation(cand) == 0) {
                xi = cand;
                exact = true;
                break;
            }
        }
    }
    long target = 2 * std::max<long>(s, 0) - 2 * std::min<long>(s, 0) + 8;
    if (!xi) {
        // Newton iteration on f(xi) = c xi^2 + 2 a1 xi + 1 from the residue root
        FElem cur = K->lift(k->neg(k->inv(K->residue(K->mul(two, a1)))));
        for (int it = 0; it < 64; ++it) {
            FElem f = K->add(K->add(K->mul(c, K->mul(cur, cur)), K->mul(K->mul(two, a1), cur)), K->one());
            if (K->is_zero(f) || K->valuation(f) >= target) break;
            FElem fp = K->add(K->mul(two, K->mul(c, cur)), K->mul(two, a1));
            cur = K->sub(cur, K->div(f, fp));
        }
        xi = cur;
    }

    std::vector<FElem> y((size_t)n, K->zero());
    for (int t = 0; t < n; ++t) y[t] = K->add(K->mul(*xi, x0[t]), cols[0][t]);
    FElem qy = quad_value(G, y);
    if (exact && !K->is_zero(qy)) fail("Internal", "exact root did not produce an isotropic vector");
    if (K->is_zero(qy)) return complete_pair(y);

    // certified pair: z = x + eta y with eta = -Q(x) / (2 (xi Q(x) + a1 Q(e1)))
    FElem denom = K->mul(two, K->add(K->mul(*xi, qx), K->mul(a1, diag[0])));
    FElem eta = K->neg(K->div(qx, denom));
    std::vector<FElem> z((size_t)n, K->zero());
    for (int t = 0; t < n; ++t) z[t] = K->add(x0[t], K->mul(eta, y[t]));
    HyperbolicPair hp;
    hp.x = y;
    hp.y = z;
    hp.exact = false;
    FElem qz = quad_value(G, z);
    long vy = K->is_zero(qy) ? target : K->valuation(qy);
    long vz = K->is_zero(qz) ? target : K->valuation(qz);
    hp.cert_level = std::min(vy, vz);
    FElem pyz = pair_value(G, y, z);
    if (K->valuation(pyz) != s) fail("Internal", "hyperbolic pair pairing off the scale");
    return hp;
}

}  // namespace qlat
