#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mra/rational.hpp"
#include "mra/scheme.hpp"

namespace mra {

// Single cap on enumeration work, counted in materialized candidate
// subspaces (enumerated family members, sums, intersections). Loops
// pre-estimate their cost and fail before starting; membership tests on
// already-materialized objects are not charged.
struct Budget {
    std::uint64_t cap = std::uint64_t{1} << 24;
    std::uint64_t used = 0;

    void charge(std::uint64_t amount, const char* what);
};

struct ConstraintSet {
    std::optional<Subspace> within;
    std::vector<Subspace> contain;
};

// A: the operational acceptance event (the derived key of the actual rule
// is inside the forged message). B: the counting semantics of the audited
// closed forms (the full rule fits inside every message involved).
enum class AttackModel { kOperational, kCounting };

std::string model_label(AttackModel m);  // "A" / "B"

struct Coalition {
    std::vector<unsigned> members;  // 1-based receiver indices, strictly increasing
};

struct MessageCensus {
    std::vector<Message> messages;             // canonically ordered
    std::vector<std::uint64_t> multiplicity;   // pairs (s, e_T) producing each message
};

std::vector<EncodingRule> enumerate_encoding_rules(const SchemeContext& ctx, Budget& budget);
std::vector<ReceiverKey> enumerate_receiver_keys(const SchemeContext& ctx, unsigned i,
                                                 Budget& budget);
std::vector<SourceState> enumerate_source_states(const SchemeContext& ctx, Budget& budget);
MessageCensus enumerate_messages(const SchemeContext& ctx, Budget& budget, unsigned threads = 1);

// Exact count of constructive rules satisfying all constraints, by filtering
// the full enumeration.
std::uint64_t count_encoding_rules(const SchemeContext& ctx, const ConstraintSet& constraints,
                                   Budget& budget);

struct PairProfile {
    unsigned common_dim = 0;        // k = dim(decode(m1) ∩ decode(m2))
    std::uint64_t rule_count = 0;   // rules inside m1 ∩ m2 containing the coalition view
};
PairProfile substitution_pair_profile(const SchemeContext& ctx, const Message& m1,
                                      const Message& m2,
                                      const std::vector<ReceiverKey>& coalition_keys,
                                      const ReceiverKey& target_key, Budget& budget);

Rational impersonation_probability(const SchemeContext& ctx, unsigned target,
                                   const Coalition& coalition, AttackModel model, Budget& budget,
                                   unsigned threads = 1);
Rational substitution_probability(const SchemeContext& ctx, unsigned target,
                                  const Coalition& coalition, AttackModel model, Budget& budget,
                                  unsigned threads = 1);

struct CheckResult {
    std::string id;
    std::string description;
    std::string formula;   // closed form under audit, "n/a" when none exists
    std::string expected;  // evaluated formula, or "n/a"
    std::string actual;
    std::optional<bool> pass;  // nullopt: recorded only (no checkable formula, or skipped)
    std::string notes;
};

struct ProbabilityRecord {
    std::string check_id;
    unsigned l = 0;
    unsigned target = 0;
    std::string model;          // "A" / "B"
    std::string method;         // "full" or "canonical-m"
    Rational value;
    std::string formula_value;  // "n/a" for model A
};

struct AuditReport {
    SchemeParams params;
    unsigned threads = 1;
    std::uint64_t budget_cap = 0;
    std::uint64_t budget_used = 0;
    std::uint64_t n_rules = 0;
    std::uint64_t n_sources = 0;
    std::uint64_t n_messages = 0;
    std::uint64_t source_candidates = 0;  // quotient lifts examined
    // rules-inside-message value -> number of messages
    std::vector<std::pair<std::uint64_t, std::uint64_t>> multiplicity_profile;
    std::vector<CheckResult> checks;  // every known check id, in canonical order
    std::vector<ProbabilityRecord> probabilities;
    // (k, rule count, unordered pair count) at the l=1 coalition
    std::vector<std::tuple<unsigned, std::uint64_t, std::uint64_t>> pair_profile;

    bool any_definite_failure() const;
};

// Classification histogram of all d-dimensional subspaces of the space
// (anzahl values by enumeration, feasible on small spaces only); the
// Gaussian-binomial candidate count is charged against the budget up front.
std::vector<std::pair<SubspaceType, std::uint64_t>> type_census(const SpaceSpec& space,
                                                                unsigned d, Budget& budget);

const std::vector<std::string>& all_check_ids();

// Runs the selected checks (empty = all); every known id appears in the
// report, unselected ones marked as skipped. Per-check budget overruns are
// recorded in the check rather than thrown; only a failure to build the base
// enumerations throws.
AuditReport audit(const SchemeContext& ctx, const std::vector<std::string>& selected,
                  Budget& budget, unsigned threads = 1);

}  // namespace mra
