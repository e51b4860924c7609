#pragma once

#include <string>

#include "mra/field.hpp"
#include "mra/linalg.hpp"
#include "mra/rng.hpp"

namespace mra {

// Classification tuple (m, 2s+tau, s, eps) of a subspace: dimension, Gram
// rank, Witt-style index, and whether the distinguished vector e_{2nu+1}
// lies in the subspace.
struct SubspaceType {
    unsigned m = 0;    // dimension
    unsigned t = 0;    // 2s + tau = Gram rank
    unsigned s = 0;
    unsigned eps = 0;  // 1 iff e_{2nu+1} in subspace

    unsigned tau() const { return t - 2 * s; }
    std::string str() const {
        return "(" + std::to_string(m) + "," + std::to_string(t) + "," + std::to_string(s) +
               "," + std::to_string(eps) + ")";
    }
    friend bool operator==(const SubspaceType&, const SubspaceType&) = default;
};

// F_q^(2nu+delta) with the non-alternate symmetric form S_delta built from
// the hyperbolic block K = [[0, I],[I, 0]]:
//   S_1 = diag(K, [1])        S_2 = diag(K, [[0,1],[1,1]])
class SpaceSpec {
public:
    SpaceSpec(const Field& field, unsigned nu, unsigned delta);

    const Field& field() const { return field_; }
    unsigned nu() const { return nu_; }
    unsigned delta() const { return delta_; }
    std::size_t dim() const { return 2 * std::size_t{nu_} + delta_; }
    const Mat& form() const { return form_; }
    // 0-based column of the distinguished basis vector e_{2nu+1}.
    std::size_t special_index() const { return 2 * std::size_t{nu_}; }
    Vec special_vector() const { return unit_vector(dim(), special_index()); }

private:
    Field field_;
    unsigned nu_;
    unsigned delta_;
    Mat form_;
};

// Reads (s, tau) off Gram rank plus alternateness; the three normal forms
// are distinguished exactly by (rank parity, zero diagonal) in
// characteristic 2, so no cogredience reduction is performed.
SubspaceType classify(const SpaceSpec& space, const Subspace& p);

// T invertible and T S_delta tT = S_delta.
bool is_group_element(const SpaceSpec& space, const Mat& t);

struct GroupElement {
    Mat matrix;
};

// Random product of 10..50 symplectic transvections and hyperbolic-pair
// swaps on the first 2nu coordinates, extended by the identity on the tail.
// Satisfies the group equation, fixes e_{2nu+1} (and e_{2nu+2} when
// delta = 2), and is deterministic given the generator state.
GroupElement random_stabilizing_element(const SpaceSpec& space, Xoshiro256StarStar& rng);

// Canonical image of P under x -> x T.
Subspace transform(const Field& f, const Subspace& p, const Mat& t);

}  // namespace mra
