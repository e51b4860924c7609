#pragma once

#include <cstdint>

#include "mra/errors.hpp"

namespace mra {

// A field element of GF(2^k), bit i = coefficient of x^i in the residue
// polynomial. Always < 2^k.
using Elem = std::uint16_t;

// GF(2^k) arithmetic context, 1 <= k <= 16. The modulus is a bit-coded
// irreducible polynomial over GF(2) of degree exactly k (bit i = coefficient
// of x^i); irreducibility is checked at construction by trial division.
class Field {
public:
    static constexpr unsigned kMaxDegree = 16;

    Field() : Field(1, 0x2) {}  // GF(2)
    Field(unsigned degree, std::uint32_t modulus);
    static Field with_default_modulus(unsigned degree) {
        return Field(degree, default_modulus(degree));
    }
    // Pinned per-degree default moduli (see field.cpp); serialized data made
    // with a default modulus is portable across builds.
    static std::uint32_t default_modulus(unsigned degree);

    unsigned degree() const { return degree_; }
    std::uint32_t modulus() const { return modulus_; }
    std::uint32_t order() const { return std::uint32_t{1} << degree_; }  // q

    Elem add(Elem a, Elem b) const { return a ^ b; }
    Elem mul(Elem a, Elem b) const;
    Elem inv(Elem a) const;
    Elem pow(Elem a, std::uint64_t e) const;

    friend bool operator==(const Field& a, const Field& b) {
        return a.degree_ == b.degree_ && a.modulus_ == b.modulus_;
    }

private:
    unsigned degree_;
    std::uint32_t modulus_;
};

// True iff the bit-coded polynomial (degree >= 1) is irreducible over GF(2).
bool gf2_poly_irreducible(std::uint32_t poly);

}  // namespace mra
