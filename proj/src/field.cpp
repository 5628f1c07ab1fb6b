#include "qlat/field.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

namespace qlat {

// ---------------------------------------------------------------- RatFunc

RatFunc rf_make(FqPoly num, FqPoly den) {
    const FqPtr& F = num.F;
    if (den.is_zero()) fail("ZeroValuation", "rational function with zero denominator");
    if (num.is_zero()) return RatFunc{fqp_zero(F), fqp_one(F)};
    FqPoly g = fqp_gcd(num, den);
    if (g.deg() > 0) {
        FqPoly q, r;
        fqp_divmod(num, g, q, r);
        num = q;
        fqp_divmod(den, g, q, r);
        den = q;
    }
    FqElem lead = den.c.back();
    if (!(lead == F->one())) {
        FqElem li = F->inv(lead);
        num = fqp_scale(li, num);
        den = fqp_scale(li, den);
    }
    return RatFunc{std::move(num), std::move(den)};
}

RatFunc rf_from_poly(FqPoly p) { return rf_make(std::move(p), fqp_one(p.F)); }

RatFunc rf_add(const RatFunc& a, const RatFunc& b) {
    return rf_make(fqp_add(fqp_mul(a.num, b.den), fqp_mul(b.num, a.den)), fqp_mul(a.den, b.den));
}
RatFunc rf_sub(const RatFunc& a, const RatFunc& b) {
    return rf_make(fqp_sub(fqp_mul(a.num, b.den), fqp_mul(b.num, a.den)), fqp_mul(a.den, b.den));
}
RatFunc rf_mul(const RatFunc& a, const RatFunc& b) {
    return rf_make(fqp_mul(a.num, b.num), fqp_mul(a.den, b.den));
}
RatFunc rf_neg(const RatFunc& a) { return RatFunc{fqp_neg(a.num), a.den}; }
RatFunc rf_inv(const RatFunc& a) {
    if (a.num.is_zero()) fail("ZeroValuation", "inverse of zero rational function");
    return rf_make(a.den, a.num);
}
bool rf_is_zero(const RatFunc& a) { return a.num.is_zero(); }
std::string rf_str(const RatFunc& a) {
    if (a.den.deg() == 0) return fqp_str(a.num);
    return "(" + fqp_str(a.num) + ")/(" + fqp_str(a.den) + ")";
}

// ---------------------------------------------------------------- square classes

std::string sc_str(SquareClass c) {
    switch (c.b) {
        case 0: return "1";
        case 1: return "u";
        case 2: return "pi";
        default: return "u*pi";
    }
}

std::optional<SquareClass> sc_parse(const std::string& s) {
    if (s == "1") return SquareClass{0};
    if (s == "u") return SquareClass{1};
    if (s == "pi") return SquareClass{2};
    if (s == "u*pi") return SquareClass{3};
    return std::nullopt;
}

int SCSubgroup::size() const {
    int n = 0;
    for (int i = 0; i < 4; ++i) n += (mask >> i) & 1;
    return n;
}

bool SCSubgroup::closed() const {
    if (!(mask & 1)) return false;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (((mask >> i) & 1) && ((mask >> j) & 1) && !((mask >> (i ^ j)) & 1)) return false;
    return true;
}

std::vector<SquareClass> SCSubgroup::elements() const {
    std::vector<SquareClass> e;
    for (int i = 0; i < 4; ++i)
        if ((mask >> i) & 1) e.push_back(SquareClass{(uint8_t)i});
    return e;
}

SCSubgroup scs_trivial() { return SCSubgroup{1}; }
SCSubgroup scs_full() { return SCSubgroup{0xF}; }

SCSubgroup scs_generated(const std::vector<SquareClass>& gens) {
    uint8_t mask = 1;
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& g : gens)
            for (int i = 0; i < 4; ++i)
                if ((mask >> i) & 1) {
                    int j = i ^ g.b;
                    if (!((mask >> j) & 1)) {
                        mask |= (uint8_t)(1 << j);
                        grew = true;
                    }
                }
    }
    return SCSubgroup{mask};
}

SCSubgroup scs_product(SCSubgroup a, SCSubgroup b) {
    uint8_t mask = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (((a.mask >> i) & 1) && ((b.mask >> j) & 1)) mask |= (uint8_t)(1 << (i ^ j));
    return SCSubgroup{mask};
}

SCSubgroup scs_with(SCSubgroup a, SquareClass c) {
    SCSubgroup g = scs_generated({c});
    return scs_product(a, g);
}

std::vector<std::string> scs_str_sorted(SCSubgroup s) {
    std::vector<std::string> out;
    for (int i = 0; i < 4; ++i)
        if ((s.mask >> i) & 1) out.push_back(sc_str(SquareClass{(uint8_t)i}));
    return out;
}

// ---------------------------------------------------------------- LocalField

namespace {
std::mutex g_base_mutex;
std::map<std::string, FieldPtr> g_base_cache;

long rat_val_p(const mpq_class& x, const mpz_class& p) {
    if (x == 0) fail("ZeroValuation", "valuation of zero");
    mpz_class tmp;
    long vn = (long)mpz_remove(tmp.get_mpz_t(), x.get_num().get_mpz_t(), p.get_mpz_t());
    long vd = (long)mpz_remove(tmp.get_mpz_t(), x.get_den().get_mpz_t(), p.get_mpz_t());
    return vn - vd;
}

// generic dense polynomial helpers over a coefficient local field
using LPoly = std::vector<FElem>;

void lp_trim(const FieldPtr& K, LPoly& a) {
    while (!a.empty() && K->is_zero(a.back())) a.pop_back();
}

LPoly lp_mul(const FieldPtr& K, const LPoly& a, const LPoly& b) {
    if (a.empty() || b.empty()) return {};
    LPoly r(a.size() + b.size() - 1, K->zero());
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = K->add(r[i + j], K->mul(a[i], b[j]));
    lp_trim(K, r);
    return r;
}

// remainder of a modulo the monic polynomial m (coeff list with lead 1 implicit
// given by lower coefficients `low` and degree n)
LPoly lp_mod_monic(const FieldPtr& K, LPoly a, const std::vector<FElem>& low) {
    size_t n = low.size();
    lp_trim(K, a);
    while (a.size() > n) {
        FElem t = a.back();
        size_t sh = a.size() - 1 - n;
        if (!K->is_zero(t))
            for (size_t i = 0; i < n; ++i) a[sh + i] = K->sub(a[sh + i], K->mul(t, low[i]));
        a.pop_back();
        lp_trim(K, a);
    }
    return a;
}

void lp_divmod(const FieldPtr& K, LPoly a, const LPoly& b, LPoly& quo, LPoly& rem) {
    lp_trim(K, a);
    LPoly bb = b;
    lp_trim(K, bb);
    if (bb.empty()) fail("Internal", "lp_divmod by zero");
    quo.clear();
    if (a.size() < bb.size()) {
        rem = a;
        return;
    }
    quo.assign(a.size() - bb.size() + 1, K->zero());
    FElem linv = K->inv(bb.back());
    while (a.size() >= bb.size() && !a.empty()) {
        FElem coef = K->mul(a.back(), linv);
        size_t sh = a.size() - bb.size();
        quo[sh] = coef;
        for (size_t i = 0; i < bb.size(); ++i) a[sh + i] = K->sub(a[sh + i], K->mul(coef, bb[i]));
        lp_trim(K, a);
    }
    rem = a;
}

// inverse of a modulo monic polynomial with lower coefficients `low`
LPoly lp_invmod(const FieldPtr& K, LPoly a, const std::vector<FElem>& low) {
    LPoly m = low;
    m.push_back(K->one());
    LPoly r0 = m, r1 = std::move(a);
    lp_trim(K, r1);
    LPoly t0, t1 = {K->one()};
    while (!r1.empty()) {
        LPoly q, rem;
        lp_divmod(K, r0, r1, q, rem);
        LPoly qt1 = lp_mul(K, q, t1);
        LPoly nt(std::max(t0.size(), qt1.size()), K->zero());
        for (size_t i = 0; i < nt.size(); ++i) {
            FElem x = i < t0.size() ? t0[i] : K->zero();
            FElem y = i < qt1.size() ? qt1[i] : K->zero();
            nt[i] = K->sub(x, y);
        }
        lp_trim(K, nt);
        t0 = std::move(t1);
        t1 = std::move(nt);
        r0 = std::move(r1);
        r1 = std::move(rem);
    }
    if (r0.size() != 1) fail("ZeroValuation", "element not invertible in tower level");
    FElem s = K->inv(r0[0]);
    for (auto& x : t0) x = K->mul(s, x);
    return t0;
}

}  // namespace

FieldPtr LocalField::padic(const mpz_class& prime) {
    if (prime == 2) fail("Unsupported", "residue characteristic 2 is not supported");
    if (mpz_probab_prime_p(prime.get_mpz_t(), 40) == 0)
        fail("Unsupported", "p must be prime, got " + prime.get_str());
    std::lock_guard<std::mutex> lk(g_base_mutex);
    std::string key = "p:" + prime.get_str();
    auto it = g_base_cache.find(key);
    if (it != g_base_cache.end()) return it->second;
    auto F = std::make_shared<LocalField>();
    F->kind = FKind::Padic;
    F->p = prime;
    if (prime > 59049) fail("Unsupported", "residue field larger than 3^10");
    F->kres = FqField::get((uint32_t)prime.get_ui(), 1);
    g_base_cache[key] = F;
    return F;
}

FieldPtr LocalField::laurent(uint32_t q) {
    // F_q = F_p[g]/(canonical), place t
    uint32_t p = q;
    int d = 1;
    {
        uint32_t n = q;
        for (uint32_t f = 2; f * f <= n; ++f) {
            if (n % f == 0) {
                p = f;
                d = 0;
                while (n % f == 0) {
                    n /= f;
                    ++d;
                }
                if (n != 1) fail("Unsupported", "q must be a prime power");
                break;
            }
        }
    }
    auto F = FqField::get(p, d);
    return laurent_at(F, fqp_x(F));
}

FieldPtr LocalField::laurent_at(FqPtr F, const FqPoly& pl) {
    if (pl.deg() < 1 || !(pl.c.back() == F->one())) fail("MalformedInput", "place must be monic of degree >= 1");
    if (!fqp_is_irreducible(pl)) fail("MalformedInput", "place polynomial is not irreducible");
    std::lock_guard<std::mutex> lk(g_base_mutex);
    std::string key = "l:" + std::to_string(F->p) + "," + std::to_string(F->d) + ":" + fqp_str(pl);
    auto it = g_base_cache.find(key);
    if (it != g_base_cache.end()) return it->second;
    auto L = std::make_shared<LocalField>();
    L->kind = FKind::Laurent;
    L->coeff = F;
    L->place = pl;
    L->rel = RelExt::make_with_poly(F, pl);
    L->kres = L->rel->big;
    g_base_cache[key] = L;
    return L;
}

FieldPtr LocalField::unramified(FieldPtr par, int f) {
    if (f < 1) fail("MalformedTower", "unramified degree must be >= 1");
    auto L = std::make_shared<LocalField>();
    L->kind = FKind::Unram;
    L->parent = par;
    L->deg = f;
    L->e_abs = par->e_abs;
    L->f_abs = par->f_abs * f;
    L->rel = RelExt::make_unramified(par->kres, f);
    L->kres = L->rel->big;
    // step polynomial: monic lift of the relative minimal polynomial
    for (int j = 0; j < f; ++j) L->stepc.push_back(par->lift(L->rel->relpoly[j]));
    return L;
}

FieldPtr LocalField::eisenstein(FieldPtr par, std::vector<FElem> low) {
    int n = (int)low.size();
    if (n < 1) fail("MalformedTower", "eisenstein step needs at least the constant coefficient");
    for (int j = 0; j < n; ++j) {
        const FElem& cj = low[j];
        if (j == 0) {
            if (par->is_zero(cj) || par->valuation(cj) != 1)
                fail("MalformedTower", "eisenstein constant coefficient must have valuation 1");
        } else if (!par->is_zero(cj) && par->valuation(cj) < 1) {
            fail("MalformedTower", "eisenstein coefficient " + std::to_string(j) + " must have positive valuation");
        }
    }
    auto L = std::make_shared<LocalField>();
    L->kind = FKind::Eisen;
    L->parent = par;
    L->deg = n;
    L->e_abs = par->e_abs * n;
    L->f_abs = par->f_abs;
    L->kres = par->kres;
    L->stepc = std::move(low);
    return L;
}

FieldPtr LocalField::base() const {
    const LocalField* f = this;
    while (!f->is_base()) f = f->parent.get();
    return f->shared_from_this();
}

std::string LocalField::describe() const {
    switch (kind) {
        case FKind::Padic: return "Q_" + p.get_str();
        case FKind::Laurent: return "F_" + std::to_string(kres->q) + "((" + fqp_str(place) + "))";
        case FKind::Unram: return parent->describe() + "[unram f=" + std::to_string(deg) + "]";
        default: return parent->describe() + "[eisen e=" + std::to_string(deg) + "]";
    }
}

FElem LocalField::zero() const {
    switch (kind) {
        case FKind::Padic: return FElem{shared_from_this(), mpq_class(0)};
        case FKind::Laurent: return FElem{shared_from_this(), RatFunc{fqp_zero(coeff), fqp_one(coeff)}};
        default: return FElem{shared_from_this(), std::vector<FElem>((size_t)deg, parent->zero())};
    }
}

FElem LocalField::one() const { return from_long(1); }

FElem LocalField::from_long(long x) const {
    switch (kind) {
        case FKind::Padic: return FElem{shared_from_this(), mpq_class((long)x)};
        case FKind::Laurent:
            return FElem{shared_from_this(), rf_from_poly(fqp_const(coeff->from_int(x)))};
        default: {
            std::vector<FElem> c((size_t)deg, parent->zero());
            c[0] = parent->from_long(x);
            return FElem{shared_from_this(), std::move(c)};
        }
    }
}

FElem LocalField::from_rat(const mpq_class& r) const {
    if (kind != FKind::Padic) fail("FieldMismatch", "rational literal over a non-padic field");
    mpq_class c = r;
    c.canonicalize();
    return FElem{shared_from_this(), std::move(c)};
}

FElem LocalField::from_rf(const RatFunc& r) const {
    if (kind != FKind::Laurent) fail("FieldMismatch", "rational-function literal over a non-laurent field");
    return FElem{shared_from_this(), r};
}

FElem LocalField::from_coords(std::vector<FElem> coords) const {
    if (is_base()) fail("FieldMismatch", "coordinate vector over a base field");
    LPoly a = std::move(coords);
    a = lp_mod_monic(parent, std::move(a), stepc);
    a.resize((size_t)deg, parent->zero());
    return FElem{shared_from_this(), std::move(a)};
}

FElem LocalField::embed(const FElem& x) const {
    if (x.f.get() == this) return x;
    if (is_base()) fail("FieldMismatch", "cannot embed into base field " + describe());
    FElem up = (x.f == parent) ? x : parent->embed(x);
    std::vector<FElem> c((size_t)deg, parent->zero());
    c[0] = std::move(up);
    return FElem{shared_from_this(), std::move(c)};
}

FElem LocalField::add(const FElem& a, const FElem& b) const {
    switch (kind) {
        case FKind::Padic: return FElem{shared_from_this(), mpq_class(a.rat() + b.rat())};
        case FKind::Laurent: return FElem{shared_from_this(), rf_add(a.rf(), b.rf())};
        default: {
            std::vector<FElem> c((size_t)deg, parent->zero());
            for (int i = 0; i < deg; ++i) c[i] = parent->add(a.vec()[i], b.vec()[i]);
            return FElem{shared_from_this(), std::move(c)};
        }
    }
}

FElem LocalField::sub(const FElem& a, const FElem& b) const { return add(a, neg(b)); }

FElem LocalField::neg(const FElem& a) const {
    switch (kind) {
        case FKind::Padic: return FElem{shared_from_this(), mpq_class(-a.rat())};
        case FKind::Laurent: return FElem{shared_from_this(), rf_neg(a.rf())};
        default: {
            std::vector<FElem> c((size_t)deg, parent->zero());
            for (int i = 0; i < deg; ++i) c[i] = parent->neg(a.vec()[i]);
            return FElem{shared_from_this(), std::move(c)};
        }
    }
}

FElem LocalField::mul(const FElem& a, const FElem& b) const {
    switch (kind) {
        case FKind::Padic: return FElem{shared_from_this(), mpq_class(a.rat() * b.rat())};
        case FKind::Laurent: return FElem{shared_from_this(), rf_mul(a.rf(), b.rf())};
        default: {
            LPoly r = lp_mul(parent, a.vec(), b.vec());
            r = lp_mod_monic(parent, std::move(r), stepc);
            r.resize((size_t)deg, parent->zero());
            return FElem{shared_from_this(), std::move(r)};
        }
    }
}

FElem LocalField::inv(const FElem& a) const {
    if (is_zero(a)) fail("ZeroValuation", "inverse of zero");
    switch (kind) {
        case FKind::Padic: return FElem{shared_from_this(), mpq_class(1 / a.rat())};
        case FKind::Laurent: return FElem{shared_from_this(), rf_inv(a.rf())};
        default: {
            LPoly r = lp_invmod(parent, a.vec(), stepc);
            r.resize((size_t)deg, parent->zero());
            return FElem{shared_from_this(), std::move(r)};
        }
    }
}

FElem LocalField::div(const FElem& a, const FElem& b) const { return mul(a, inv(b)); }

bool LocalField::is_zero(const FElem& a) const {
    switch (kind) {
        case FKind::Padic: return a.rat() == 0;
        case FKind::Laurent: return rf_is_zero(a.rf());
        default:
            for (const auto& c : a.vec())
                if (!parent->is_zero(c)) return false;
            return true;
    }
}

bool LocalField::eq(const FElem& a, const FElem& b) const { return is_zero(sub(a, b)); }

long LocalField::valuation(const FElem& a) const {
    if (is_zero(a)) fail("ZeroValuation", "valuation of zero");
    switch (kind) {
        case FKind::Padic: return rat_val_p(a.rat(), p);
        case FKind::Laurent:
            return fqp_order_at(a.rf().num, place) - fqp_order_at(a.rf().den, place);
        case FKind::Unram: {
            long m = 0;
            bool first = true;
            for (const auto& c : a.vec()) {
                if (parent->is_zero(c)) continue;
                long v = parent->valuation(c);
                if (first || v < m) m = v, first = false;
            }
            return m;
        }
        default: {  // Eisen
            long m = 0;
            bool first = true;
            for (int j = 0; j < deg; ++j) {
                const FElem& c = a.vec()[j];
                if (parent->is_zero(c)) continue;
                long v = (long)deg * parent->valuation(c) + j;
                if (first || v < m) m = v, first = false;
            }
            return m;
        }
    }
}

FqElem LocalField::residue(const FElem& a) const {
    if (is_zero(a)) return kres->zero();
    switch (kind) {
        case FKind::Padic: {
            const mpq_class& r = a.rat();
            mpz_class num = r.get_num() % p, den = r.get_den() % p;
            if (num < 0) num += p;
            if (den < 0) den += p;
            FqElem n = kres->from_int(num.get_si());
            FqElem d = kres->from_int(den.get_si());
            return kres->mul(n, kres->inv(d));
        }
        case FKind::Laurent: {
            // evaluate num/den at the chosen root of the place polynomial
            const RatFunc& r = a.rf();
            auto ev = [&](const FqPoly& poly) {
                FqElem acc = kres->zero(), xp = kres->one();
                for (int i = 0; i <= poly.deg(); ++i) {
                    acc = kres->add(acc, kres->mul(rel->embed_sub(poly.c[i]), xp));
                    xp = kres->mul(xp, rel->root);
                }
                return acc;
            };
            FqElem n = ev(r.num), d = ev(r.den);
            return kres->mul(n, kres->inv(d));
        }
        case FKind::Unram: {
            std::vector<FqElem> coords;
            for (const auto& c : a.vec()) coords.push_back(parent->residue(c));
            return rel->compose(coords);
        }
        default:
            return parent->residue(a.vec()[0]);
    }
}

FElem LocalField::lift(const FqElem& r) const {
    switch (kind) {
        case FKind::Padic: {
            return FElem{shared_from_this(), mpq_class((long)r.c[0])};
        }
        case FKind::Laurent: {
            std::vector<FqElem> coords = rel->decompose(r);
            FqPoly poly = fqp_make(coeff, coords);
            return FElem{shared_from_this(), rf_from_poly(poly)};
        }
        case FKind::Unram: {
            std::vector<FqElem> coords = rel->decompose(r);
            std::vector<FElem> c;
            for (int j = 0; j < deg; ++j) c.push_back(parent->lift(coords[j]));
            return FElem{shared_from_this(), std::move(c)};
        }
        default: {
            std::vector<FElem> c((size_t)deg, parent->zero());
            c[0] = parent->lift(r);
            return FElem{shared_from_this(), std::move(c)};
        }
    }
}

FElem LocalField::uniformizer() const {
    switch (kind) {
        case FKind::Padic: return FElem{shared_from_this(), mpq_class(p)};
        case FKind::Laurent: return FElem{shared_from_this(), rf_from_poly(place)};
        case FKind::Unram: return embed(parent->uniformizer());
        default: {
            std::vector<FElem> c((size_t)deg, parent->zero());
            if (deg == 1) {
                // degree-1 eisenstein step: x = -c0
                return embed(parent->neg(stepc[0]));
            }
            c[1] = parent->one();
            return FElem{shared_from_this(), std::move(c)};
        }
    }
}

FElem LocalField::pi_pow(long k) const {
    FElem pi = uniformizer();
    FElem r = one();
    FElem b = k >= 0 ? pi : inv(pi);
    long n = k >= 0 ? k : -k;
    while (n) {
        if (n & 1) r = mul(r, b);
        b = mul(b, b);
        n >>= 1;
    }
    return r;
}

FElem LocalField::unit_nonsquare() const {
    if (!nonsquare_cache_) nonsquare_cache_ = lift(kres->canonical_nonsquare());
    return *nonsquare_cache_;
}

bool LocalField::is_square(const FElem& a) const {
    if (is_zero(a)) fail("ZeroValuation", "square test of zero");
    long v = valuation(a);
    if (v & 1) return false;
    FElem unit = mul(a, pi_pow(-v));
    return kres->is_square(residue(unit));
}

SquareClass LocalField::square_class(const FElem& a) const {
    if (is_zero(a)) fail("ZeroValuation", "square class of zero");
    long v = valuation(a);
    FElem unit = mul(a, pi_pow(-v));
    uint8_t b = 0;
    if (!kres->is_square(residue(unit))) b |= 1;
    if (v & 1) b |= 2;
    return SquareClass{b};
}

FElem LocalField::class_rep(SquareClass c) const {
    FElem r = one();
    if (c.b & 1) r = mul(r, unit_nonsquare());
    if (c.b & 2) r = mul(r, uniformizer());
    return r;
}

int LocalField::hilbert(const FElem& a, const FElem& b) const {
    if (is_zero(a) || is_zero(b)) fail("ZeroValuation", "hilbert symbol with zero argument");
    long al = valuation(a), be = valuation(b);
    FElem ua = mul(a, pi_pow(-al)), ub = mul(b, pi_pow(-be));
    int lega = kres->is_square(residue(ua)) ? 1 : -1;
    int legb = kres->is_square(residue(ub)) ? 1 : -1;
    int legm1 = (kres->q % 4 == 1) ? 1 : -1;
    int r = 1;
    if ((al & 1) && (be & 1)) r *= legm1;
    if (be & 1) r *= lega;
    if (al & 1) r *= legb;
    return r;
}

FElem LocalField::norm_step(const FElem& a) const {
    if (is_base()) fail("FieldMismatch", "norm step below a base field");
    // determinant of multiplication by a on the power basis, over the parent
    int n = deg;
    std::vector<std::vector<FElem>> M((size_t)n, std::vector<FElem>((size_t)n, parent->zero()));
    FElem cur = a;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) M[j][(size_t)i] = cur.vec()[j];
        if (i + 1 < n) {
            // multiply by x
            std::vector<FElem> c((size_t)n + 1, parent->zero());
            for (int j = 0; j < n; ++j) c[j + 1] = cur.vec()[j];
            cur = from_coords(std::move(c));
        }
    }
    // Gaussian elimination over the parent field
    FElem det = parent->one();
    bool negd = false;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!parent->is_zero(M[r][col])) { piv = r; break; }
        if (piv < 0) return parent->zero();
        if (piv != col) {
            std::swap(M[piv], M[(size_t)col]);
            negd = !negd;
        }
        det = parent->mul(det, M[col][(size_t)col]);
        FElem pinv = parent->inv(M[col][(size_t)col]);
        for (int r = col + 1; r < n; ++r) {
            if (parent->is_zero(M[r][(size_t)col])) continue;
            FElem f = parent->mul(M[r][(size_t)col], pinv);
            for (int cc = col; cc < n; ++cc)
                M[r][(size_t)cc] = parent->sub(M[r][(size_t)cc], parent->mul(f, M[col][(size_t)cc]));
        }
    }
    if (negd) det = parent->neg(det);
    return det;
}

FElem LocalField::norm_to_base(const FElem& a) const {
    FElem x = a;
    const LocalField* f = this;
    while (!f->is_base()) {
        x = f->norm_step(x);
        f = f->parent.get();
    }
    return x;
}

std::string LocalField::str(const FElem& a) const {
    switch (kind) {
        case FKind::Padic: return a.rat().get_str();
        case FKind::Laurent: return rf_str(a.rf());
        default: {
            std::string s = "[";
            for (int i = 0; i < deg; ++i) {
                if (i) s += ", ";
                s += parent->str(a.vec()[i]);
            }
            return s + "]";
        }
    }
}

// ---------------------------------------------------------------- towers

ExtensionTower make_tower(FieldPtr base, const std::vector<TowerStepSpec>& steps) {
    ExtensionTower t;
    t.base = base;
    t.levels.push_back(base);
    FieldPtr cur = base;
    for (const auto& s : steps) {
        if (s.unram) {
            cur = LocalField::unramified(cur, s.f);
        } else {
            cur = LocalField::eisenstein(cur, s.eisen);
        }
        t.levels.push_back(cur);
    }
    t.top = cur;
    t.e = cur->e_abs / base->e_abs;
    t.f = cur->f_abs / base->f_abs;
    return t;
}

std::pair<int, int> ramification(const ExtensionTower& t) { return {t.e, t.f}; }

FElem tower_norm(const ExtensionTower& t, const FElem& x) {
    if (!same_field(x.f, t.top)) fail("FieldMismatch", "norm argument not in the tower's top field");
    FElem r = x;
    const LocalField* f = t.top.get();
    while (f != t.base.get()) {
        r = f->norm_step(r);
        f = f->parent.get();
    }
    return r;
}

bool same_field(const FieldPtr& a, const FieldPtr& b) { return a.get() == b.get(); }

}  // namespace qlat
