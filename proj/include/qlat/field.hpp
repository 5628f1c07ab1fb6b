#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qlat/fq.hpp"

namespace qlat {

class LocalField;
using FieldPtr = std::shared_ptr<const LocalField>;

/// Rational function over F_q, normalized: monic nonzero denominator,
/// gcd(num, den) = 1, zero is 0/1.
struct RatFunc {
    FqPoly num, den;
};

RatFunc rf_make(FqPoly num, FqPoly den);
RatFunc rf_from_poly(FqPoly p);
RatFunc rf_add(const RatFunc& a, const RatFunc& b);
RatFunc rf_sub(const RatFunc& a, const RatFunc& b);
RatFunc rf_mul(const RatFunc& a, const RatFunc& b);
RatFunc rf_neg(const RatFunc& a);
RatFunc rf_inv(const RatFunc& a);
bool rf_is_zero(const RatFunc& a);
std::string rf_str(const RatFunc& a);

/// Element of a local field (base or tower level). Payload by field kind:
/// exact rational, rational function, or coordinate vector over the parent.
class FElem {
public:
    FieldPtr f;
    std::variant<mpq_class, RatFunc, std::vector<FElem>> v;

    const mpq_class& rat() const { return std::get<mpq_class>(v); }
    const RatFunc& rf() const { return std::get<RatFunc>(v); }
    const std::vector<FElem>& vec() const { return std::get<std::vector<FElem>>(v); }
};

/// Square class in F^x/(F^x)^2 for odd residue characteristic: Klein
/// four-group {1, u, pi, u*pi}. bit0 = nonsquare unit part, bit1 = odd
/// valuation.
struct SquareClass {
    uint8_t b = 0;
    bool operator==(const SquareClass& o) const { return b == o.b; }
    bool operator!=(const SquareClass& o) const { return b != o.b; }
};

inline SquareClass sc_mul(SquareClass a, SquareClass b) { return SquareClass{(uint8_t)(a.b ^ b.b)}; }
inline SquareClass sc_one() { return SquareClass{0}; }
std::string sc_str(SquareClass c);
std::optional<SquareClass> sc_parse(const std::string& s);

/// Subgroup of the Klein four-group of square classes (bitmask over the four
/// classes, bit i for class with encoding i).
struct SCSubgroup {
    uint8_t mask = 1;  // always contains the trivial class

    bool contains(SquareClass c) const { return (mask >> c.b) & 1; }
    bool operator==(const SCSubgroup& o) const { return mask == o.mask; }
    bool operator!=(const SCSubgroup& o) const { return mask != o.mask; }
    int size() const;
    bool closed() const;
    std::vector<SquareClass> elements() const;
};

SCSubgroup scs_trivial();
SCSubgroup scs_full();
SCSubgroup scs_generated(const std::vector<SquareClass>& gens);
SCSubgroup scs_product(SCSubgroup a, SCSubgroup b);
SCSubgroup scs_with(SCSubgroup a, SquareClass c);   // subgroup generated by a and c
std::vector<std::string> scs_str_sorted(SCSubgroup s);

enum class FKind { Padic, Laurent, Unram, Eisen };

/// A complete discretely valued field of odd residue characteristic with
/// exact arithmetic on a dense subring: Q_p (payload Q), a completion of
/// F_q(t) at a finite place (payload F_q(t)), or a finite-extension tower
/// level built from unramified and Eisenstein steps.
class LocalField : public std::enable_shared_from_this<LocalField> {
public:
    FKind kind;

    // Padic
    mpz_class p;

    // Laurent: completion of F_q(t) at the place (monic irreducible)
    FqPtr coeff;
    FqPoly place;

    // tower level
    FieldPtr parent;
    int deg = 1;                  // step degree
    std::vector<FElem> stepc;     // lower coefficients of the monic step polynomial

    // derived
    int e_abs = 1, f_abs = 1;     // over the bottom base field
    FqPtr kres;                   // residue field (absolute representation)
    std::shared_ptr<RelExt> rel;  // laurent base / unramified level

    static FieldPtr padic(const mpz_class& prime);
    static FieldPtr laurent(uint32_t q);                         // place t over F_q
    static FieldPtr laurent_at(FqPtr F, const FqPoly& place);    // arbitrary finite place
    static FieldPtr unramified(FieldPtr parent, int f);
    static FieldPtr eisenstein(FieldPtr parent, std::vector<FElem> lower_coeffs);

    bool is_base() const { return kind == FKind::Padic || kind == FKind::Laurent; }
    FieldPtr base() const;
    int degree_over_base() const { return e_abs * f_abs; }
    std::string describe() const;

    // element constructors
    FElem zero() const;
    FElem one() const;
    FElem from_long(long v) const;
    FElem from_rat(const mpq_class& r) const;          // padic
    FElem from_rf(const RatFunc& r) const;             // laurent
    FElem from_coords(std::vector<FElem> coords) const;  // tower level
    FElem embed(const FElem& x) const;                 // from this field or any ancestor

    // arithmetic
    FElem add(const FElem& a, const FElem& b) const;
    FElem sub(const FElem& a, const FElem& b) const;
    FElem neg(const FElem& a) const;
    FElem mul(const FElem& a, const FElem& b) const;
    FElem inv(const FElem& a) const;
    FElem div(const FElem& a, const FElem& b) const;
    bool is_zero(const FElem& a) const;
    bool eq(const FElem& a, const FElem& b) const;

    // valuation-theoretic structure (all exact)
    long valuation(const FElem& a) const;              // ZeroValuation on 0
    FqElem residue(const FElem& a) const;              // requires v(a) >= 0; 0 when v > 0
    FElem lift(const FqElem& r) const;
    FElem uniformizer() const;
    FElem pi_pow(long k) const;
    FElem unit_nonsquare() const;
    bool is_square(const FElem& a) const;
    SquareClass square_class(const FElem& a) const;
    FElem class_rep(SquareClass c) const;
    int hilbert(const FElem& a, const FElem& b) const;

    // field norm down one step / down to the bottom base
    FElem norm_step(const FElem& a) const;
    FElem norm_to_base(const FElem& a) const;

    std::string str(const FElem& a) const;

private:
    mutable std::optional<FElem> nonsquare_cache_;
};

/// Finite extension tower E/F described by unramified and Eisenstein steps.
struct TowerStepSpec {
    bool unram = true;
    int f = 1;
    std::vector<FElem> eisen;  // lower coefficients over the step's base level
};

struct ExtensionTower {
    FieldPtr base;
    FieldPtr top;
    std::vector<FieldPtr> levels;  // base, ..., top
    int e = 1, f = 1;

    int degree() const { return e * f; }
    bool trivial() const { return levels.size() == 1; }
};

ExtensionTower make_tower(FieldPtr base, const std::vector<TowerStepSpec>& steps);
std::pair<int, int> ramification(const ExtensionTower& t);  // (e, f)

/// N_{E/F} of an element of the top level, as an element of the base.
FElem tower_norm(const ExtensionTower& t, const FElem& x);

bool same_field(const FieldPtr& a, const FieldPtr& b);

}  // namespace qlat
