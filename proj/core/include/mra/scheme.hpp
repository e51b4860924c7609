#pragma once

#include <cstdint>
#include <vector>

#include "mra/field.hpp"
#include "mra/linalg.hpp"
#include "mra/psgeom.hpp"
#include "mra/rng.hpp"

namespace mra {

// Validated scheme parameters; the constraint chain is 2 < n+1 < r < nu.
struct SchemeParams {
    Field field;
    unsigned nu = 0;
    unsigned receivers = 0;  // n
    unsigned rank = 0;       // r

    friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

SchemeParams validate_params(const Field& field, unsigned nu, unsigned receivers, unsigned rank);

// Immutable after setup; shares freely across threads.
struct SchemeContext {
    SchemeParams params;
    SpaceSpec space;               // delta = 2
    Subspace anchor;               // the n-dimensional subspace inside every key and message
    Subspace anchor_perp;          // its orthogonal complement; bounds source states

    std::size_t dim() const { return space.dim(); }
    unsigned n() const { return params.receivers; }
    unsigned r() const { return params.rank; }
    unsigned nu() const { return params.nu; }
    const Field& field() const { return params.field; }

    SubspaceType rule_type() const;     // (2n, 2n, n, 0)
    SubspaceType key_type() const;      // (n+1, 2, 1, 0) as classified
    SubspaceType source_type() const;   // (2r-n+1, 2(r-n), r-n, 1)
    SubspaceType message_type() const;  // (2r+1, 2r, r, 1)
};

SchemeContext setup(const SchemeParams& params);

// Sender's encoding rule: the span of the anchor together with one generator
// row per receiver. Row i is determined by its free blocks: `mid` (columns
// n+1..nu) and `special` (the e_{2nu+1} coefficient); the remaining blocks
// are normatively zero.
struct EncodingRule {
    Mat mid;                    // n x (nu-n)
    std::vector<Elem> special;  // n
    Subspace subspace;          // derived, dim 2n
};

// Receiver i's key: anchor + one generator row with the same block layout.
struct ReceiverKey {
    unsigned index = 0;  // 1-based
    Vec mid;             // nu-n
    Elem special = 0;
    Subspace subspace;   // dim n+1
};

struct SourceState {
    Subspace subspace;  // dim 2r-n+1, between anchor and anchor_perp
};

struct Message {
    Subspace subspace;  // dim 2r+1, contains the anchor
};

// Generator row i (1-based): (0^n | mid | unit at nu+i | 0^(nu-n) | special | 0).
Vec rule_row(const SchemeContext& ctx, unsigned i, std::span<const Elem> mid, Elem special);

EncodingRule make_encoding_rule(const SchemeContext& ctx, Mat mid, std::vector<Elem> special);
EncodingRule sample_encoding_rule(const SchemeContext& ctx, Xoshiro256StarStar& rng);
// Recovers the block form from a bare subspace; MalformedRule when the
// subspace is not in the normalized family.
EncodingRule rule_from_subspace(const SchemeContext& ctx, const Subspace& s);

ReceiverKey make_receiver_key(const SchemeContext& ctx, unsigned i, Vec mid, Elem special);
// Deterministic: exactly one family key for receiver i lies inside a given
// rule (coordinate analysis pins its generator row to row i of the rule).
ReceiverKey derive_receiver_key(const SchemeContext& ctx, const EncodingRule& rule, unsigned i);
ReceiverKey key_from_subspace(const SchemeContext& ctx, unsigned i, const Subspace& s);

SourceState source_state_from_subspace(const SchemeContext& ctx, const Subspace& s);
// Census-uniform at desk scale, rejection-sampled otherwise (cap 10000).
SourceState sample_source_state(const SchemeContext& ctx, Xoshiro256StarStar& rng);

Message message_from_subspace(const SchemeContext& ctx, const Subspace& s);
// m = s + rule; the classification postcondition is re-checked, a failure
// throws TypeCheckFailed.
Message encode(const SchemeContext& ctx, const SourceState& s, const EncodingRule& rule);
// Shape-checks m (MalformedMessage), then tests key containment; a clean
// `false` always means authentication failure.
bool verify(const SchemeContext& ctx, const Message& m, const ReceiverKey& key);
// s = m intersect anchor_perp; the unique source state inside m.
SourceState decode(const SchemeContext& ctx, const Message& m);

namespace detail {

// All subspaces s with anchor ⊂ s ⊂ anchor_perp, e_{2nu+1} in s and source
// classification, by lifting quotient subspaces; the candidate count is the
// Gaussian binomial [2(nu-n)+1 choose 2(r-n)]_q.
std::vector<Subspace> enumerate_source_subspaces(const SchemeContext& ctx);
std::uint64_t gaussian_binomial(unsigned m, unsigned k, std::uint64_t q);  // saturates

}  // namespace detail
}  // namespace mra
