#include "qlat/fq.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cassert>
#include <mutex>

namespace qlat {

namespace {

constexpr uint64_t kMaxCard = 59049;  // 3^10

// raw polynomial helpers over F_p (vectors of residues, lowest degree first)
using PVec = std::vector<uint32_t>;

void ptrim(PVec& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

PVec pmulmodp(const PVec& a, const PVec& b, uint32_t p) {
    if (a.empty() || b.empty()) return {};
    PVec r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) continue;
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = (uint32_t)((r[i + j] + (uint64_t)a[i] * b[j]) % p);
    }
    ptrim(r);
    return r;
}

uint32_t pinv_scalar(uint32_t a, uint32_t p) {
    // extended Euclid on integers
    int64_t t = 0, nt = 1, r = p, nr = a % p;
    while (nr != 0) {
        int64_t qq = r / nr;
        std::swap(t -= qq * nt, nt);
        std::swap(r -= qq * nr, nr);
    }
    if (t < 0) t += p;
    return (uint32_t)t;
}

// a mod m, m monic
PVec pmodp(PVec a, const PVec& m, uint32_t p) {
    ptrim(a);
    while (a.size() >= m.size()) {
        uint32_t lead = a.back();
        size_t shift = a.size() - m.size();
        if (lead) {
            for (size_t i = 0; i + 1 < m.size(); ++i) {
                uint64_t sub = (uint64_t)lead * m[i] % p;
                a[i + shift] = (uint32_t)((a[i + shift] + p - sub) % p);
            }
        }
        a.pop_back();
        ptrim(a);
        if (a.size() < m.size()) break;
    }
    return a;
}

// inverse of a modulo m over F_p (m monic, gcd = 1)
PVec pinvmodp(PVec a, const PVec& m, uint32_t p) {
    PVec r0 = m, r1 = pmodp(std::move(a), m, p);
    PVec t0 = {}, t1 = {1};
    while (!r1.empty()) {
        // divide r0 by r1
        PVec q;
        PVec rem = r0;
        ptrim(rem);
        if (rem.size() >= r1.size()) {
            q.assign(rem.size() - r1.size() + 1, 0);
            uint32_t linv = pinv_scalar(r1.back(), p);
            while (rem.size() >= r1.size() && !rem.empty()) {
                uint32_t coef = (uint32_t)((uint64_t)rem.back() * linv % p);
                size_t shift = rem.size() - r1.size();
                q[shift] = coef;
                if (coef) {
                    for (size_t i = 0; i < r1.size(); ++i) {
                        uint64_t sub = (uint64_t)coef * r1[i] % p;
                        rem[i + shift] = (uint32_t)((rem[i + shift] + p - sub) % p);
                    }
                }
                ptrim(rem);
            }
        }
        PVec qt1 = pmulmodp(q, t1, p);
        PVec nt(std::max(t0.size(), qt1.size()), 0);
        for (size_t i = 0; i < nt.size(); ++i) {
            uint32_t x = i < t0.size() ? t0[i] : 0;
            uint32_t y = i < qt1.size() ? qt1[i] : 0;
            nt[i] = (x + p - y) % p;
        }
        ptrim(nt);
        t0 = std::move(t1);
        t1 = std::move(nt);
        r0 = std::move(r1);
        r1 = std::move(rem);
    }
    // r0 = gcd (constant), scale
    if (r0.size() != 1) fail("Internal", "pinvmodp: element not invertible");
    uint32_t s = pinv_scalar(r0[0], p);
    for (auto& x : t0) x = (uint32_t)((uint64_t)x * s % p);
    ptrim(t0);
    return t0;
}

std::mutex g_field_mutex;
std::map<std::pair<uint32_t, int>, FqPtr> g_fields;

bool is_prime_u32(uint32_t n) {
    if (n < 2) return false;
    for (uint32_t i = 2; (uint64_t)i * i <= n; ++i)
        if (n % i == 0) return false;
    return true;
}

}  // namespace

bool FqElem::is_zero() const {
    for (auto x : c)
        if (x) return false;
    return true;
}

FqPtr FqField::get(uint32_t p, int d) {
    if (p == 2) fail("Unsupported", "residue characteristic 2 is not supported");
    if (!is_prime_u32(p)) fail("Unsupported", "field characteristic must be prime, got " + std::to_string(p));
    if (d < 1) fail("Unsupported", "extension degree must be >= 1");
    mpz_class card;
    mpz_ui_pow_ui(card.get_mpz_t(), p, (unsigned long)d);
    if (card > kMaxCard) fail("Unsupported", "residue field of size " + card.get_str() + " exceeds the 3^10 cap");

    std::lock_guard<std::mutex> lk(g_field_mutex);
    auto key = std::make_pair(p, d);
    auto it = g_fields.find(key);
    if (it != g_fields.end()) return it->second;

    auto F = std::make_shared<FqField>();
    F->p = p;
    F->d = d;
    F->q = card.get_ui();
    if (d == 1) {
        F->modulus = {0, 1};  // x
    } else {
        // canonical table entry: least monic irreducible of degree d in the
        // base-p enumeration of lower-coefficient vectors
        auto Fp = g_fields.count({p, 1}) ? g_fields[{p, 1}] : nullptr;
        if (!Fp) {
            auto P = std::make_shared<FqField>();
            P->p = p;
            P->d = 1;
            P->q = p;
            P->modulus = {0, 1};
            g_fields[{p, 1}] = P;
            Fp = P;
        }
        uint64_t ncand = 1;
        for (int i = 0; i < d; ++i) ncand *= p;
        bool found = false;
        for (uint64_t idx = 0; idx < ncand && !found; ++idx) {
            std::vector<FqElem> cc;
            uint64_t t = idx;
            for (int i = 0; i < d; ++i) {
                cc.push_back(Fp->from_int((long long)(t % p)));
                t /= p;
            }
            cc.push_back(Fp->one());
            FqPoly cand = fqp_make(Fp, cc);
            if (fqp_is_irreducible(cand)) {
                F->modulus.resize(d + 1);
                for (int i = 0; i <= d; ++i) F->modulus[i] = cand.c[i].c[0];
                found = true;
            }
        }
        if (!found) fail("Internal", "no irreducible polynomial found");
    }
    g_fields[key] = F;
    return F;
}

FqElem FqField::zero() const { return FqElem{shared_from_this(), std::vector<uint32_t>(d, 0)}; }
FqElem FqField::one() const { return from_int(1); }
FqElem FqField::gen() const {
    std::vector<uint32_t> c(d, 0);
    if (d == 1)
        c[0] = 0;  // F_p[x]/(x): generator is 0
    else
        c[1] = 1;
    return FqElem{shared_from_this(), std::move(c)};
}

FqElem FqField::from_int(long long v) const {
    long long m = v % (long long)p;
    if (m < 0) m += p;
    std::vector<uint32_t> c(d, 0);
    c[0] = (uint32_t)m;
    return FqElem{shared_from_this(), std::move(c)};
}

FqElem FqField::make(std::vector<uint32_t> coeffs) const {
    coeffs.resize(d, 0);
    for (auto& x : coeffs) x %= p;
    return FqElem{shared_from_this(), std::move(coeffs)};
}

FqElem FqField::add(const FqElem& a, const FqElem& b) const {
    std::vector<uint32_t> c(d);
    for (int i = 0; i < d; ++i) c[i] = (a.c[i] + b.c[i]) % p;
    return FqElem{shared_from_this(), std::move(c)};
}

FqElem FqField::sub(const FqElem& a, const FqElem& b) const {
    std::vector<uint32_t> c(d);
    for (int i = 0; i < d; ++i) c[i] = (a.c[i] + p - b.c[i]) % p;
    return FqElem{shared_from_this(), std::move(c)};
}

FqElem FqField::neg(const FqElem& a) const {
    std::vector<uint32_t> c(d);
    for (int i = 0; i < d; ++i) c[i] = a.c[i] ? p - a.c[i] : 0;
    return FqElem{shared_from_this(), std::move(c)};
}

FqElem FqField::mul(const FqElem& a, const FqElem& b) const {
    PVec r = pmulmodp(a.c, b.c, p);
    r = pmodp(std::move(r), modulus, p);
    r.resize(d, 0);
    return FqElem{shared_from_this(), std::move(r)};
}

FqElem FqField::inv(const FqElem& a) const {
    if (a.is_zero()) fail("ZeroValuation", "inverse of zero in finite field");
    PVec r = pinvmodp(a.c, modulus, p);
    r.resize(d, 0);
    return FqElem{shared_from_this(), std::move(r)};
}

FqElem FqField::pow(FqElem a, uint64_t e) const {
    FqElem r = one();
    while (e) {
        if (e & 1) r = mul(r, a);
        a = mul(a, a);
        e >>= 1;
    }
    return r;
}

bool FqField::is_square(const FqElem& a) const {
    if (a.is_zero()) fail("ZeroValuation", "square test of zero");
    return pow(a, (q - 1) / 2) == one();
}

std::optional<FqElem> FqField::sqrt(const FqElem& a) const {
    if (a.is_zero()) fail("ZeroValuation", "sqrt of zero");
    if (!is_square(a)) return std::nullopt;
    // desk-scale field: direct scan in canonical order
    for (uint64_t i = 1; i < q; ++i) {
        FqElem r = element_from_index(i);
        if (mul(r, r) == a) return r;
    }
    return std::nullopt;
}

FqElem FqField::canonical_nonsquare() const {
    for (uint64_t i = 1; i < q; ++i) {
        FqElem r = element_from_index(i);
        if (!r.is_zero() && !is_square(r)) return r;
    }
    fail("Internal", "no nonsquare found");
}

FqElem FqField::element_from_index(uint64_t idx) const {
    std::vector<uint32_t> c(d);
    for (int i = 0; i < d; ++i) {
        c[i] = (uint32_t)(idx % p);
        idx /= p;
    }
    return FqElem{shared_from_this(), std::move(c)};
}

uint64_t FqField::index_of(const FqElem& a) const {
    uint64_t idx = 0;
    for (int i = d - 1; i >= 0; --i) idx = idx * p + a.c[i];
    return idx;
}

FqElem FqField::embed_generator_image(const FqPtr& sub) const {
    if (sub->p != p || d % sub->d != 0) fail("Internal", "invalid subfield embedding request");
    auto it = embed_cache_.find(sub->d);
    if (it != embed_cache_.end()) return it->second;
    // least root of sub's defining polynomial in this field
    for (uint64_t i = 0; i < q; ++i) {
        FqElem x = element_from_index(i);
        FqElem acc = zero(), xp = one();
        for (size_t j = 0; j < sub->modulus.size(); ++j) {
            acc = add(acc, mul(from_int(sub->modulus[j]), xp));
            xp = mul(xp, x);
        }
        if (acc.is_zero()) {
            embed_cache_[sub->d] = x;
            return x;
        }
    }
    fail("Internal", "embedding root not found");
}

FqElem FqField::embed_from(const FqElem& s) const {
    const FqPtr sub = s.F;
    if (sub.get() == this) return s;
    FqElem g = embed_generator_image(sub);
    FqElem acc = zero(), gp = one();
    for (int i = 0; i < sub->d; ++i) {
        acc = add(acc, mul(from_int(s.c[i]), gp));
        gp = mul(gp, g);
    }
    return acc;
}

std::string FqField::str(const FqElem& a) const { return std::to_string(index_of(a)); }

// ---------------------------------------------------------------- FqPoly

bool FqPoly::operator==(const FqPoly& o) const {
    if (c.size() != o.c.size()) return false;
    for (size_t i = 0; i < c.size(); ++i)
        if (c[i] != o.c[i]) return false;
    return true;
}

FqPoly fqp_make(const FqPtr& F, std::vector<FqElem> coeffs) {
    while (!coeffs.empty() && coeffs.back().is_zero()) coeffs.pop_back();
    return FqPoly{F, std::move(coeffs)};
}

FqPoly fqp_zero(const FqPtr& F) { return FqPoly{F, {}}; }
FqPoly fqp_one(const FqPtr& F) { return fqp_make(F, {F->one()}); }
FqPoly fqp_x(const FqPtr& F) { return fqp_make(F, {F->zero(), F->one()}); }
FqPoly fqp_const(const FqElem& a) { return fqp_make(a.F, {a}); }

FqPoly fqp_from_ints(const FqPtr& F, const std::vector<long long>& coeffs) {
    std::vector<FqElem> c;
    c.reserve(coeffs.size());
    for (auto v : coeffs) c.push_back(F->from_int(v));
    return fqp_make(F, std::move(c));
}

FqPoly fqp_add(const FqPoly& a, const FqPoly& b) {
    const FqPtr& F = a.F;
    std::vector<FqElem> c(std::max(a.c.size(), b.c.size()), F->zero());
    for (size_t i = 0; i < c.size(); ++i) {
        if (i < a.c.size()) c[i] = F->add(c[i], a.c[i]);
        if (i < b.c.size()) c[i] = F->add(c[i], b.c[i]);
    }
    return fqp_make(F, std::move(c));
}

FqPoly fqp_neg(const FqPoly& a) {
    std::vector<FqElem> c = a.c;
    for (auto& x : c) x = a.F->neg(x);
    return FqPoly{a.F, std::move(c)};
}

FqPoly fqp_sub(const FqPoly& a, const FqPoly& b) { return fqp_add(a, fqp_neg(b)); }

FqPoly fqp_mul(const FqPoly& a, const FqPoly& b) {
    const FqPtr& F = a.F;
    if (a.is_zero() || b.is_zero()) return fqp_zero(F);
    std::vector<FqElem> c(a.c.size() + b.c.size() - 1, F->zero());
    for (size_t i = 0; i < a.c.size(); ++i) {
        if (a.c[i].is_zero()) continue;
        for (size_t j = 0; j < b.c.size(); ++j)
            c[i + j] = F->add(c[i + j], F->mul(a.c[i], b.c[j]));
    }
    return fqp_make(F, std::move(c));
}

FqPoly fqp_scale(const FqElem& s, const FqPoly& a) {
    std::vector<FqElem> c = a.c;
    for (auto& x : c) x = a.F->mul(s, x);
    return fqp_make(a.F, std::move(c));
}

void fqp_divmod(const FqPoly& a, const FqPoly& b, FqPoly& quo, FqPoly& rem) {
    const FqPtr& F = a.F;
    if (b.is_zero()) fail("Internal", "polynomial division by zero");
    rem = a;
    quo = fqp_zero(F);
    if (rem.deg() < b.deg()) return;
    std::vector<FqElem> qc(rem.deg() - b.deg() + 1, F->zero());
    FqElem linv = F->inv(b.c.back());
    while (!rem.is_zero() && rem.deg() >= b.deg()) {
        int shift = rem.deg() - b.deg();
        FqElem coef = F->mul(rem.c.back(), linv);
        qc[shift] = coef;
        std::vector<FqElem> rc = rem.c;
        for (int i = 0; i <= b.deg(); ++i)
            rc[i + shift] = F->sub(rc[i + shift], F->mul(coef, b.c[i]));
        rem = fqp_make(F, std::move(rc));
    }
    quo = fqp_make(F, std::move(qc));
}

FqPoly fqp_mod(const FqPoly& a, const FqPoly& b) {
    FqPoly q, r;
    fqp_divmod(a, b, q, r);
    return r;
}

FqPoly fqp_monic(const FqPoly& a) {
    if (a.is_zero()) return a;
    return fqp_scale(a.F->inv(a.c.back()), a);
}

FqPoly fqp_gcd(FqPoly a, FqPoly b) {
    while (!b.is_zero()) {
        FqPoly r = fqp_mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return fqp_monic(a);
}

FqPoly fqp_derivative(const FqPoly& a) {
    const FqPtr& F = a.F;
    if (a.deg() <= 0) return fqp_zero(F);
    std::vector<FqElem> c(a.c.size() - 1, F->zero());
    for (size_t i = 1; i < a.c.size(); ++i)
        c[i - 1] = F->mul(F->from_int((long long)i), a.c[i]);
    return fqp_make(F, std::move(c));
}

FqPoly fqp_powmod_u64(FqPoly base, uint64_t e, const FqPoly& mod) {
    FqPoly r = fqp_one(base.F);
    base = fqp_mod(base, mod);
    while (e) {
        if (e & 1) r = fqp_mod(fqp_mul(r, base), mod);
        base = fqp_mod(fqp_mul(base, base), mod);
        e >>= 1;
    }
    return r;
}

FqPoly fqp_powmod_bits(const FqPoly& base, const std::vector<bool>& bits, const FqPoly& mod) {
    FqPoly r = fqp_one(base.F);
    for (bool b : bits) {
        r = fqp_mod(fqp_mul(r, r), mod);
        if (b) r = fqp_mod(fqp_mul(r, base), mod);
    }
    return r;
}

FqElem fqp_eval(const FqPoly& a, const FqElem& x) {
    const FqPtr& F = x.F;
    FqElem acc = F->zero();
    for (int i = a.deg(); i >= 0; --i) acc = F->add(F->mul(acc, x), a.c[i]);
    return acc;
}

bool fqp_is_irreducible(const FqPoly& a) {
    const FqPtr& F = a.F;
    int n = a.deg();
    if (n <= 0) return false;
    if (n == 1) return true;
    if (a.c[0].is_zero()) return false;  // divisible by x
    FqPoly f = fqp_monic(a);
    // x^{q^n} == x mod f, and gcd(x^{q^{n/l}} - x, f) = 1 for primes l | n
    FqPoly xq = fqp_x(F);
    std::vector<FqPoly> frob_powers;  // frob_powers[i] = x^{q^{i+1}} mod f
    for (int i = 0; i < n; ++i) {
        xq = fqp_powmod_u64(xq, F->q, f);
        frob_powers.push_back(xq);
    }
    if (!(fqp_sub(frob_powers[n - 1], fqp_x(F)).is_zero())) return false;
    for (int l = 2; l <= n; ++l) {
        if (n % l) continue;
        bool lprime = true;
        for (int t = 2; t * t <= l; ++t)
            if (l % t == 0) lprime = false;
        if (!lprime) continue;
        FqPoly g = fqp_gcd(f, fqp_sub(frob_powers[n / l - 1], fqp_x(F)));
        if (g.deg() != 0) return false;
    }
    return true;
}

namespace {

uint64_t rng_state = 0x9e3779b97f4a7c15ull;
uint64_t rng_next() {
    rng_state ^= rng_state << 13;
    rng_state ^= rng_state >> 7;
    rng_state ^= rng_state << 17;
    return rng_state;
}

std::vector<bool> mpz_bits(const mpz_class& e) {
    std::vector<bool> bits;
    for (long i = (long)mpz_sizeinbase(e.get_mpz_t(), 2) - 1; i >= 0; --i)
        bits.push_back(mpz_tstbit(e.get_mpz_t(), i));
    return bits;
}

// equal-degree splitting of a squarefree product of degree-dd irreducibles
void edf(const FqPoly& f, int dd, std::vector<FqPoly>& out) {
    const FqPtr& F = f.F;
    if (f.deg() == dd) {
        out.push_back(fqp_monic(f));
        return;
    }
    mpz_class qpow;
    mpz_ui_pow_ui(qpow.get_mpz_t(), (unsigned long)F->q, (unsigned long)dd);
    mpz_class e = (qpow - 1) / 2;
    std::vector<bool> bits = mpz_bits(e);
    while (true) {
        std::vector<FqElem> rc;
        for (int i = 0; i < f.deg(); ++i)
            rc.push_back(F->element_from_index(rng_next() % F->q));
        FqPoly r = fqp_make(F, std::move(rc));
        if (r.is_zero()) continue;
        FqPoly pw = fqp_powmod_bits(r, bits, f);
        FqPoly g = fqp_gcd(f, fqp_sub(pw, fqp_one(F)));
        if (g.deg() > 0 && g.deg() < f.deg()) {
            FqPoly q, rem;
            fqp_divmod(f, g, q, rem);
            edf(g, dd, out);
            edf(q, dd, out);
            return;
        }
    }
}

void factor_squarefree(const FqPoly& f, std::vector<FqPoly>& out) {
    const FqPtr& F = f.F;
    if (f.deg() <= 0) return;
    FqPoly rest = fqp_monic(f);
    FqPoly xq = fqp_x(F);
    int dd = 0;
    while (rest.deg() > 0) {
        ++dd;
        if (2 * dd > rest.deg()) {
            out.push_back(rest);
            break;
        }
        xq = fqp_powmod_u64(xq, F->q, rest);
        FqPoly g = fqp_gcd(rest, fqp_sub(xq, fqp_x(F)));
        if (g.deg() > 0) {
            edf(g, dd, out);
            FqPoly q, rem;
            fqp_divmod(rest, g, q, rem);
            rest = fqp_monic(q);
            xq = fqp_mod(xq, rest);
        }
    }
}

}  // namespace

namespace {

FqPoly fqp_pth_root(const FqPoly& g) {
    const FqPtr& F = g.F;
    std::vector<FqElem> hc;
    for (int i = 0; i <= g.deg(); i += (int)F->p) {
        // p-th roots are unique in F_q: c^(q/p)
        hc.push_back(F->pow(g.c[i], F->q / F->p));
    }
    return fqp_make(F, std::move(hc));
}

void distinct_irreducibles(const FqPoly& f, std::vector<FqPoly>& out) {
    const FqPtr& F = f.F;
    if (f.deg() <= 0) return;
    FqPoly der = fqp_derivative(f);
    if (der.is_zero()) {
        distinct_irreducibles(fqp_pth_root(f), out);
        return;
    }
    FqPoly sf;
    {
        FqPoly gg = fqp_gcd(f, der);
        FqPoly q, rem;
        fqp_divmod(f, gg, q, rem);
        sf = fqp_monic(q);
    }
    size_t before = out.size();
    factor_squarefree(sf, out);
    FqPoly rest = f;
    for (size_t i = before; i < out.size(); ++i) {
        while (true) {
            FqPoly q, rem;
            fqp_divmod(rest, out[i], q, rem);
            if (!rem.is_zero()) break;
            rest = q;
        }
    }
    distinct_irreducibles(fqp_monic(rest), out);
}

}  // namespace

std::vector<std::pair<FqPoly, int>> fqp_factor(const FqPoly& a) {
    const FqPtr& F = a.F;
    std::vector<std::pair<FqPoly, int>> result;
    if (a.deg() <= 0) return result;
    rng_state = 0x9e3779b97f4a7c15ull;  // deterministic runs
    FqPoly f = fqp_monic(a);
    std::vector<FqPoly> irred;
    distinct_irreducibles(f, irred);
    std::sort(irred.begin(), irred.end(), [&](const FqPoly& x, const FqPoly& y) {
        if (x.deg() != y.deg()) return x.deg() < y.deg();
        for (int i = x.deg(); i >= 0; --i) {
            uint64_t a1 = F->index_of(x.c[i]), b1 = F->index_of(y.c[i]);
            if (a1 != b1) return a1 < b1;
        }
        return false;
    });
    irred.erase(std::unique(irred.begin(), irred.end(),
                            [](const FqPoly& x, const FqPoly& y) { return x == y; }),
                irred.end());
    for (const FqPoly& g : irred) {
        int mult = 0;
        FqPoly rest = f;
        while (true) {
            FqPoly q, rem;
            fqp_divmod(rest, g, q, rem);
            if (!rem.is_zero()) break;
            ++mult;
            rest = q;
        }
        if (mult > 0) result.push_back({g, mult});
    }
    return result;
}

int fqp_order_at(const FqPoly& a, const FqPoly& place) {
    if (a.is_zero()) fail("ZeroValuation", "order of the zero polynomial");
    int ord = 0;
    FqPoly rest = a;
    while (true) {
        FqPoly q, rem;
        fqp_divmod(rest, place, q, rem);
        if (!rem.is_zero()) break;
        ++ord;
        rest = q;
    }
    return ord;
}

std::string fqp_str(const FqPoly& a, const std::string& var) {
    if (a.is_zero()) return "0";
    std::string s;
    for (int i = 0; i <= a.deg(); ++i) {
        if (a.c[i].is_zero()) continue;
        if (!s.empty()) s += "+";
        s += a.F->str(a.c[i]);
        if (i >= 1) s += "*" + var;
        if (i >= 2) s += "^" + std::to_string(i);
    }
    return s;
}

// ---------------------------------------------------------------- RelExt

void RelExt::build_basis_matrix() {
    uint32_t p = big->p;
    int n = big->d;
    FqElem phig = big->embed_generator_image(sub);
    // columns indexed by (j, i): phi(gen_sub^i) * root^j
    std::vector<uint32_t> B((size_t)n * n, 0);
    FqElem rp = big->one();
    for (int j = 0; j < rel_deg; ++j) {
        FqElem gi = big->one();
        for (int i = 0; i < sub->d; ++i) {
            FqElem v = big->mul(rp, gi);
            int col = j * sub->d + i;
            for (int r = 0; r < n; ++r) B[(size_t)r * n + col] = v.c[r];
            gi = big->mul(gi, phig);
        }
        rp = big->mul(rp, root);
    }
    // invert B mod p by Gauss-Jordan
    std::vector<uint32_t> A = B, I((size_t)n * n, 0);
    for (int i = 0; i < n; ++i) I[(size_t)i * n + i] = 1;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (A[(size_t)r * n + col]) { piv = r; break; }
        if (piv < 0) fail("Internal", "relative basis matrix is singular");
        if (piv != col)
            for (int cc = 0; cc < n; ++cc) {
                std::swap(A[(size_t)piv * n + cc], A[(size_t)col * n + cc]);
                std::swap(I[(size_t)piv * n + cc], I[(size_t)col * n + cc]);
            }
        uint32_t inv = pinv_scalar(A[(size_t)col * n + col], p);
        for (int cc = 0; cc < n; ++cc) {
            A[(size_t)col * n + cc] = (uint32_t)((uint64_t)A[(size_t)col * n + cc] * inv % p);
            I[(size_t)col * n + cc] = (uint32_t)((uint64_t)I[(size_t)col * n + cc] * inv % p);
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            uint32_t f = A[(size_t)r * n + col];
            if (!f) continue;
            for (int cc = 0; cc < n; ++cc) {
                A[(size_t)r * n + cc] =
                    (uint32_t)((A[(size_t)r * n + cc] + p - (uint32_t)((uint64_t)f * A[(size_t)col * n + cc] % p)) % p);
                I[(size_t)r * n + cc] =
                    (uint32_t)((I[(size_t)r * n + cc] + p - (uint32_t)((uint64_t)f * I[(size_t)col * n + cc] % p)) % p);
            }
        }
    }
    inv_basis_ = std::move(I);
}

std::vector<FqElem> RelExt::decompose(const FqElem& x) const {
    int n = big->d;
    uint32_t p = big->p;
    std::vector<uint32_t> coords(n, 0);
    for (int r = 0; r < n; ++r) {
        uint64_t acc = 0;
        for (int cc = 0; cc < n; ++cc) acc += (uint64_t)inv_basis_[(size_t)r * n + cc] * x.c[cc];
        coords[r] = (uint32_t)(acc % p);
    }
    std::vector<FqElem> out;
    out.reserve(rel_deg);
    for (int j = 0; j < rel_deg; ++j) {
        std::vector<uint32_t> sc(sub->d);
        for (int i = 0; i < sub->d; ++i) sc[i] = coords[j * sub->d + i];
        out.push_back(FqElem{sub, std::move(sc)});
    }
    return out;
}

FqElem RelExt::compose(const std::vector<FqElem>& coords) const {
    FqElem acc = big->zero(), rp = big->one();
    for (int j = 0; j < rel_deg; ++j) {
        acc = big->add(acc, big->mul(embed_sub(coords[j]), rp));
        rp = big->mul(rp, root);
    }
    return acc;
}

FqElem RelExt::embed_sub(const FqElem& x) const { return big->embed_from(x); }

std::shared_ptr<RelExt> RelExt::make_unramified(const FqPtr& sub, int r) {
    auto re = std::make_shared<RelExt>();
    re->sub = sub;
    re->rel_deg = r;
    re->big = FqField::get(sub->p, sub->d * r);
    re->root = re->big->gen();
    re->build_basis_matrix();
    // minimal polynomial of the generator over sub: root^r = sum c_j root^j
    FqElem rr = re->big->pow(re->big->gen(), 1);
    FqElem target = re->big->one();
    for (int i = 0; i < r; ++i) target = re->big->mul(target, rr);
    std::vector<FqElem> cj = re->decompose(target);
    re->relpoly.clear();
    for (int j = 0; j < r; ++j) re->relpoly.push_back(sub->neg(cj[j]));
    re->relpoly.push_back(sub->one());
    return re;
}

std::shared_ptr<RelExt> RelExt::make_with_poly(const FqPtr& sub, const FqPoly& poly) {
    auto re = std::make_shared<RelExt>();
    int r = poly.deg();
    re->sub = sub;
    re->rel_deg = r;
    re->big = FqField::get(sub->p, sub->d * r);
    // least root of poly (coefficients pushed through the embedding)
    const FqPtr& B = re->big;
    bool found = false;
    for (uint64_t i = 0; i < B->q && !found; ++i) {
        FqElem x = B->element_from_index(i);
        FqElem acc = B->zero(), xp = B->one();
        for (int j = 0; j <= r; ++j) {
            acc = B->add(acc, B->mul(B->embed_from(poly.c[j]), xp));
            xp = B->mul(xp, x);
        }
        if (acc.is_zero()) {
            re->root = x;
            found = true;
        }
    }
    if (!found) fail("Internal", "no root of place polynomial in residue field");
    re->build_basis_matrix();
    re->relpoly = poly.c;
    return re;
}

}  // namespace qlat
