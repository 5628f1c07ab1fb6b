#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlat {

struct Error : std::runtime_error {
    std::string code;
    Error(std::string c, const std::string& msg) : std::runtime_error(msg), code(std::move(c)) {}
};

[[noreturn]] inline void fail(const char* code, const std::string& msg) { throw Error(code, msg); }

struct FqField;
using FqPtr = std::shared_ptr<const FqField>;

/// Element of a finite field F_{p^d}, stored as a coefficient vector of
/// length d over F_p with respect to the field's defining polynomial.
struct FqElem {
    FqPtr F;
    std::vector<uint32_t> c;

    bool is_zero() const;
    bool operator==(const FqElem& o) const { return c == o.c; }
    bool operator!=(const FqElem& o) const { return c != o.c; }
};

/// F_{p^d} realized as F_p[x]/(m) with m the canonical (lexicographically
/// least monic) irreducible of degree d. Instances are interned per (p, d),
/// and cardinality is capped at 3^10 = 59049.
struct FqField : std::enable_shared_from_this<FqField> {
    uint32_t p = 0;
    int d = 1;
    uint64_t q = 0;                   // p^d
    std::vector<uint32_t> modulus;    // monic, length d+1

    static FqPtr get(uint32_t p, int d);

    FqElem zero() const;
    FqElem one() const;
    FqElem gen() const;
    FqElem from_int(long long v) const;   // image of an integer (prime subfield)
    FqElem make(std::vector<uint32_t> coeffs) const;

    FqElem add(const FqElem& a, const FqElem& b) const;
    FqElem sub(const FqElem& a, const FqElem& b) const;
    FqElem neg(const FqElem& a) const;
    FqElem mul(const FqElem& a, const FqElem& b) const;
    FqElem inv(const FqElem& a) const;
    FqElem pow(FqElem a, uint64_t e) const;

    bool is_square(const FqElem& a) const;              // a != 0
    std::optional<FqElem> sqrt(const FqElem& a) const;  // a != 0
    FqElem canonical_nonsquare() const;

    // canonical enumeration, index in [0, q): base-p digit vectors
    FqElem element_from_index(uint64_t idx) const;
    uint64_t index_of(const FqElem& a) const;

    // canonical embedding F_{p^ds} -> this (ds | d): image of the subfield generator
    FqElem embed_generator_image(const FqPtr& sub) const;
    FqElem embed_from(const FqElem& sub_elem) const;

    std::string str(const FqElem& a) const;

private:
    mutable std::map<int, FqElem> embed_cache_;
};

/// Polynomial over F_q, lowest degree first, no trailing zero coefficients.
struct FqPoly {
    FqPtr F;
    std::vector<FqElem> c;

    int deg() const { return (int)c.size() - 1; }   // deg(0) = -1
    bool is_zero() const { return c.empty(); }
    bool operator==(const FqPoly& o) const;
};

FqPoly fqp_make(const FqPtr& F, std::vector<FqElem> coeffs);
FqPoly fqp_zero(const FqPtr& F);
FqPoly fqp_one(const FqPtr& F);
FqPoly fqp_x(const FqPtr& F);
FqPoly fqp_const(const FqElem& a);
FqPoly fqp_from_ints(const FqPtr& F, const std::vector<long long>& coeffs);
FqPoly fqp_add(const FqPoly& a, const FqPoly& b);
FqPoly fqp_sub(const FqPoly& a, const FqPoly& b);
FqPoly fqp_neg(const FqPoly& a);
FqPoly fqp_mul(const FqPoly& a, const FqPoly& b);
FqPoly fqp_scale(const FqElem& s, const FqPoly& a);
void fqp_divmod(const FqPoly& a, const FqPoly& b, FqPoly& quo, FqPoly& rem);
FqPoly fqp_mod(const FqPoly& a, const FqPoly& b);
FqPoly fqp_gcd(FqPoly a, FqPoly b);              // monic
FqPoly fqp_monic(const FqPoly& a);
FqPoly fqp_derivative(const FqPoly& a);
FqPoly fqp_powmod_u64(FqPoly base, uint64_t e, const FqPoly& mod);
FqPoly fqp_powmod_bits(const FqPoly& base, const std::vector<bool>& bits_msb_first, const FqPoly& mod);
FqElem fqp_eval(const FqPoly& a, const FqElem& x);
bool fqp_is_irreducible(const FqPoly& a);
std::vector<std::pair<FqPoly, int>> fqp_factor(const FqPoly& a);   // monic irreducible factors
std::string fqp_str(const FqPoly& a, const std::string& var = "t");

/// Multiplicity of the monic irreducible `place` in `a` (a != 0).
int fqp_order_at(const FqPoly& a, const FqPoly& place);

/// Data for a relative extension k_sub -> k_big of degree r, with a chosen
/// root in k_big of the relative minimal polynomial. Supplies the coordinate
/// maps used by residue and lift computations.
struct RelExt {
    FqPtr sub, big;
    int rel_deg = 1;
    FqElem root;                      // in big
    std::vector<FqElem> relpoly;      // monic over sub, length rel_deg+1

    // big elem  <->  coordinates over sub w.r.t. basis {root^j}
    std::vector<FqElem> decompose(const FqElem& x) const;
    FqElem compose(const std::vector<FqElem>& coords) const;
    FqElem embed_sub(const FqElem& x) const;

    // relative minimal polynomial of big's canonical generator over sub
    static std::shared_ptr<RelExt> make_unramified(const FqPtr& sub, int r);
    // given monic irreducible poly over sub; root chosen canonically in big
    static std::shared_ptr<RelExt> make_with_poly(const FqPtr& sub, const FqPoly& poly);

private:
    std::vector<uint32_t> inv_basis_;   // (big.d x big.d) inverse basis matrix mod p, row-major
    void build_basis_matrix();
};

}  // namespace qlat
