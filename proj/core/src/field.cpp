#include "mra/field.hpp"

#include <bit>
#include <string>

namespace mra {
namespace {

int poly_degree(std::uint32_t p) { return std::bit_width(p) - 1; }

// Remainder of a mod b over GF(2)[x].
std::uint32_t poly_mod(std::uint64_t a, std::uint32_t b) {
    const unsigned db = static_cast<unsigned>(poly_degree(b));
    while (a != 0 && std::bit_width(a) > db) {
        a ^= static_cast<std::uint64_t>(b) << (std::bit_width(a) - 1 - db);
    }
    return static_cast<std::uint32_t>(a);
}

constexpr std::uint32_t kDefaultModulus[Field::kMaxDegree + 1] = {
    0,
    0x2,      // x
    0x7,      // x^2+x+1
    0xb,      // x^3+x+1
    0x13,     // x^4+x+1
    0x25,     // x^5+x^2+1
    0x43,     // x^6+x+1
    0x83,     // x^7+x+1
    0x11b,    // x^8+x^4+x^3+x+1
    0x211,    // x^9+x^4+1
    0x409,    // x^10+x^3+1
    0x805,    // x^11+x^2+1
    0x1053,   // x^12+x^6+x^4+x+1
    0x201b,   // x^13+x^4+x^3+x+1
    0x4443,   // x^14+x^10+x^6+x+1
    0x8003,   // x^15+x+1
    0x1100b,  // x^16+x^12+x^3+x+1
};

}  // namespace

bool gf2_poly_irreducible(std::uint32_t poly) {
    const int d = poly_degree(poly);
    if (d < 1) return false;
    if (d == 1) return true;
    if ((poly & 1) == 0) return false;  // divisible by x
    for (int dd = 1; dd <= d / 2; ++dd) {
        for (std::uint32_t div = std::uint32_t{1} << dd; div < (std::uint32_t{2} << dd); ++div) {
            if (poly_mod(poly, div) == 0) return false;
        }
    }
    return true;
}

Field::Field(unsigned degree, std::uint32_t modulus) : degree_(degree), modulus_(modulus) {
    if (degree < 1 || degree > kMaxDegree) {
        throw FieldError("field degree out of range [1," + std::to_string(kMaxDegree) +
                         "]: " + std::to_string(degree));
    }
    if (poly_degree(modulus) != static_cast<int>(degree)) {
        throw FieldError("modulus degree != field degree");
    }
    if (!gf2_poly_irreducible(modulus)) {
        throw FieldError("reducible modulus");
    }
}

std::uint32_t Field::default_modulus(unsigned degree) {
    if (degree < 1 || degree > kMaxDegree) {
        throw FieldError("field degree out of range [1," + std::to_string(kMaxDegree) +
                         "]: " + std::to_string(degree));
    }
    return kDefaultModulus[degree];
}

Elem Field::mul(Elem a, Elem b) const {
    // Carry-less product, then reduce mod the modulus.
    std::uint64_t acc = 0;
    for (unsigned i = 0; i < degree_; ++i) {
        if ((b >> i) & 1) acc ^= static_cast<std::uint64_t>(a) << i;
    }
    return static_cast<Elem>(poly_mod(acc, modulus_));
}

Elem Field::pow(Elem a, std::uint64_t e) const {
    Elem result = 1;
    Elem base = a;
    while (e != 0) {
        if (e & 1) result = mul(result, base);
        base = mul(base, base);
        e >>= 1;
    }
    return result;
}

Elem Field::inv(Elem a) const {
    if (a == 0) throw DivisionByZero("inverse of zero");
    return pow(a, order() - 2);
}

}  // namespace mra
