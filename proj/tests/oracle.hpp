#pragma once

// Self-contained embedding decision for integer Gram matrices over Z_3,
// independent of the library: exhaustive digit search of T^t G_M T = G_N
// modulo 3^k followed by the Newton lifting criterion. Written against
// machine integers only.
#include <cstdint>
#include <vector>

namespace embed_oracle {

using IMat = std::vector<std::vector<long long>>;

inline long long ipow3(int k) {
    long long r = 1;
    while (k-- > 0) r *= 3;
    return r;
}

inline int v3(long long x) {
    if (x == 0) return 1 << 20;
    int v = 0;
    while (x % 3 == 0) x /= 3, ++v;
    return v;
}

// determinant and adjugate of a small integer matrix
inline long long idet(const IMat& A) {
    int n = (int)A.size();
    if (n == 0) return 1;
    if (n == 1) return A[0][0];
    if (n == 2) return A[0][0] * A[1][1] - A[0][1] * A[1][0];
    long long d = 0;
    for (int j = 0; j < n; ++j) {
        IMat minor;
        for (int r = 1; r < n; ++r) {
            std::vector<long long> row;
            for (int c = 0; c < n; ++c)
                if (c != j) row.push_back(A[r][c]);
            minor.push_back(row);
        }
        long long term = A[0][j] * idet(minor);
        d += (j % 2 == 0) ? term : -term;
    }
    return d;
}

inline IMat iadj(const IMat& A) {
    int n = (int)A.size();
    IMat adj(n, std::vector<long long>(n, 0));
    if (n == 1) {
        adj[0][0] = 1;
        return adj;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            IMat minor;
            for (int r = 0; r < n; ++r) {
                if (r == i) continue;
                std::vector<long long> row;
                for (int c = 0; c < n; ++c)
                    if (c != j) row.push_back(A[r][c]);
                minor.push_back(row);
            }
            long long cof = idet(minor);
            adj[j][i] = ((i + j) % 2 == 0) ? cof : -cof;
        }
    return adj;
}

/// Does T in Z_3^{n x m} with T^t G_M T = G_N exist? Decided by enumerating
/// all congruence solutions modulo 3^k, k = 2*d0 + 1 with d0 the pole order
/// of G_N^{-1}: a solution mod 3^k lifts by the Newton step
/// T <- T - T G_N^{-1} f(T)/2, and any exact solution reduces to one.
inline bool embeds_z3(const IMat& gn, const IMat& gm) {
    int m = (int)gn.size(), n = (int)gm.size();
    if (m == 0) return true;
    if (m > n) return false;

    long long dn = idet(gn);
    if (dn == 0) return false;
    IMat adj = iadj(gn);
    int minadj = 1 << 20;
    for (auto& row : adj)
        for (auto x : row) minadj = std::min(minadj, v3(x));
    int d0 = std::max(0, v3(dn) - minadj);
    int k = 2 * d0 + 1;
    long long mod = ipow3(k);

    // enumerate column c against previous columns, digit level by digit level
    std::vector<std::vector<long long>> cols;
    struct Frame {
        int col;
        std::vector<std::vector<long long>> cands;
        size_t next = 0;
    };

    auto column_solutions = [&](int c, const std::vector<std::vector<long long>>& prev) {
        std::vector<std::vector<long long>> frontier = {std::vector<long long>((size_t)n, 0)};
        for (int level = 1; level <= k; ++level) {
            long long lm = ipow3(level), step = ipow3(level - 1);
            std::vector<std::vector<long long>> next;
            for (const auto& base : frontier) {
                std::vector<int> digit((size_t)n, 0);
                while (true) {
                    std::vector<long long> cand = base;
                    for (int i = 0; i < n; ++i) cand[i] = (cand[i] + digit[i] * step) % mod;
                    // congruences at this level
                    __int128 q = 0;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) q += (__int128)cand[i] * gm[i][j] % mod * cand[j];
                    bool ok = ((long long)(q % lm) - gn[c][c] % lm) % lm == 0;
                    for (int b = 0; b < c && ok; ++b) {
                        __int128 pr = 0;
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j) pr += (__int128)prev[b][i] * gm[i][j] % mod * cand[j];
                        ok = ((long long)(pr % lm) - gn[b][c] % lm) % lm == 0;
                    }
                    if (ok) next.push_back(cand);
                    int pos = 0;
                    while (pos < n) {
                        if (++digit[pos] <= 2) break;
                        digit[pos] = 0;
                        ++pos;
                    }
                    if (pos == n) break;
                }
            }
            frontier = std::move(next);
            if (frontier.empty()) break;
        }
        return frontier;
    };

    // depth-first over columns
    std::vector<Frame> stack;
    stack.push_back(Frame{0, column_solutions(0, {}), 0});
    std::vector<std::vector<long long>> chosen;
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next >= f.cands.size()) {
            stack.pop_back();
            if (!chosen.empty()) chosen.pop_back();
            continue;
        }
        std::vector<long long> pick = f.cands[f.next++];
        chosen.push_back(pick);
        if ((int)chosen.size() == m) return true;
        stack.push_back(Frame{(int)chosen.size(), column_solutions((int)chosen.size(), chosen), 0});
    }
    return false;
}

}  // namespace embed_oracle
