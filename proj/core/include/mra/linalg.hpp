#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mra/errors.hpp"
#include "mra/field.hpp"

namespace mra {

using Vec = std::vector<Elem>;

// Dense row-major matrix over the field.
struct Mat {
    std::size_t nrows = 0;
    std::size_t ncols = 0;
    std::vector<Elem> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : nrows(r), ncols(c), a(r * c, 0) {}

    Elem& at(std::size_t r, std::size_t c) { return a[r * ncols + c]; }
    Elem at(std::size_t r, std::size_t c) const { return a[r * ncols + c]; }
    std::span<const Elem> row(std::size_t r) const { return {a.data() + r * ncols, ncols}; }
    std::span<Elem> row(std::size_t r) { return {a.data() + r * ncols, ncols}; }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }
    static Mat from_rows(const std::vector<Vec>& rows);  // throws on ragged input

    friend bool operator==(const Mat&, const Mat&) = default;
};

// A subspace of F_q^ambient held as its reduced row echelon basis: each pivot
// is 1, pivot columns are otherwise zero, pivot columns strictly increase,
// no zero rows. Two Subspace values are equal iff their matrices are
// identical, so equality, hashing and deduplication are all structural.
struct Subspace {
    std::size_t ambient = 0;
    Mat basis;  // strict RREF

    std::size_t dim() const { return basis.nrows; }

    friend bool operator==(const Subspace&, const Subspace&) = default;
    // Lexicographic; used only to fix deterministic enumeration orders.
    friend bool operator<(const Subspace& x, const Subspace& y) {
        if (x.ambient != y.ambient) return x.ambient < y.ambient;
        if (x.basis.nrows != y.basis.nrows) return x.basis.nrows < y.basis.nrows;
        return x.basis.a < y.basis.a;
    }
};

struct SubspaceHash {
    std::size_t operator()(const Subspace& s) const {
        std::uint64_t h = 1469598103934665603ull ^ (s.ambient * 1099511628211ull);
        for (Elem e : s.basis.a) {
            h ^= e;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

Subspace zero_subspace(std::size_t ambient);
Subspace full_space(std::size_t ambient);
Vec unit_vector(std::size_t ambient, std::size_t index);  // index 0-based

// Canonical RREF of the row span; zero rows dropped. Rows of a Mat are
// rectangular by construction; the vector-of-rows overload rejects ragged
// input.
Subspace canonicalize(const Field& f, const Mat& rows, std::size_t ambient);
Subspace canonicalize(const Field& f, const std::vector<Vec>& rows, std::size_t ambient);

Subspace sum(const Field& f, const Subspace& a, const Subspace& b);
// Kernel method: coefficient vectors whose A-combination lies in B. No
// bilinear form involved.
Subspace intersect(const Field& f, const Subspace& a, const Subspace& b);
bool contains(const Field& f, const Subspace& a, std::span<const Elem> v);
bool contains(const Field& f, const Subspace& a, const Subspace& b);

// G = P S tP, a dim x dim symmetric matrix.
Mat gram(const Field& f, const Subspace& p, const Mat& form);
// P^perp under the form: nullspace of y S tP = 0. Requires a nondegenerate
// form; checked via the dimension identity dim + dim^perp = ambient.
Subspace perp(const Field& f, const Subspace& p, const Mat& form);

unsigned rank(const Field& f, Mat m);
bool is_canonical_rref(const Mat& m);

Mat mat_mul(const Field& f, const Mat& x, const Mat& y);
Mat transpose(const Mat& m);
bool mat_invertible(const Field& f, const Mat& m);

// Basis of {z : z C = 0} (left nullspace), canonical.
Mat left_nullspace(const Field& f, const Mat& c);

namespace detail {

// Visits every d-dimensional subspace of F_q^D exactly once, as a d x D
// canonical reduced-echelon matrix: pivot-column combinations in
// lexicographic order, free entries by odometer. The visit count is the
// Gaussian binomial [D choose d]_q.
void for_each_rref_matrix(const Field& f, unsigned D, unsigned d,
                          const std::function<void(const Mat&)>& fn);

// Both elimination kernels are exposed so tests can pin them to identical
// canonical forms; q = 2 inputs dispatch to the bit-packed kernel, rows as
// single 64-bit words with word-wide XOR row operations.
void rref_generic(const Field& f, Mat& m);
void rref_bitpacked(Mat& m);  // requires ncols <= 64 and q == 2 semantics

std::uint64_t pack_row(std::span<const Elem> row);

// Precomputed membership tester for one GF(2) subspace; used by hot
// enumeration loops.
struct PackedBasis {
    std::vector<std::uint64_t> rows;  // RREF, pivot = lowest set bit
    std::vector<std::uint64_t> pivot_bit;
    std::uint64_t pivot_mask = 0;

    static PackedBasis from(const Subspace& s);
    bool contains(std::uint64_t v) const {
        for (std::size_t i = 0; i < rows.size() && v != 0; ++i) {
            if (v & pivot_bit[i]) v ^= rows[i];
        }
        return v == 0;
    }
};

}  // namespace detail
}  // namespace mra
