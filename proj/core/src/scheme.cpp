#include "mra/scheme.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace mra {
namespace {

constexpr unsigned kSamplingAttemptCap = 10000;
// Above this many quotient candidates the sampler switches from full
// enumeration to rejection sampling.
constexpr std::uint64_t kSamplingEnumCap = 1u << 16;

void check_receiver_index(const SchemeContext& ctx, unsigned i) {
    if (i < 1 || i > ctx.n()) {
        throw ConstraintViolation("receiver index " + std::to_string(i) + " outside 1.." +
                                  std::to_string(ctx.n()));
    }
}

Elem pair_under_form(const SchemeContext& ctx, std::span<const Elem> x, std::span<const Elem> y) {
    const Field& f = ctx.field();
    const Mat& s = ctx.space.form();
    Elem acc = 0;
    for (std::size_t a = 0; a < x.size(); ++a) {
        if (x[a] == 0) continue;
        Elem inner = 0;
        for (std::size_t b = 0; b < y.size(); ++b) {
            if (y[b] != 0) inner = f.add(inner, f.mul(s.at(a, b), y[b]));
        }
        acc = f.add(acc, f.mul(x[a], inner));
    }
    return acc;
}

}  // namespace

SchemeParams validate_params(const Field& field, unsigned nu, unsigned receivers, unsigned rank) {
    if (receivers + 1 <= 2) {
        throw ConstraintViolation("2 < n+1 violated: n = " + std::to_string(receivers));
    }
    if (rank <= receivers + 1) {
        throw ConstraintViolation("n+1 < r violated: n = " + std::to_string(receivers) +
                                  ", r = " + std::to_string(rank));
    }
    if (nu <= rank) {
        throw ConstraintViolation("r < nu violated: r = " + std::to_string(rank) +
                                  ", nu = " + std::to_string(nu));
    }
    return SchemeParams{field, nu, receivers, rank};
}

SubspaceType SchemeContext::rule_type() const {
    const unsigned n = params.receivers;
    return SubspaceType{2 * n, 2 * n, n, 0};
}
SubspaceType SchemeContext::key_type() const {
    // The generator row pairs with e_i under the form, so the classification
    // has Gram rank 2 (the family is often labeled totally isotropic; the
    // audit records the discrepancy).
    return SubspaceType{params.receivers + 1, 2, 1, 0};
}
SubspaceType SchemeContext::source_type() const {
    const unsigned n = params.receivers, r = params.rank;
    return SubspaceType{2 * r - n + 1, 2 * (r - n), r - n, 1};
}
SubspaceType SchemeContext::message_type() const {
    const unsigned r = params.rank;
    return SubspaceType{2 * r + 1, 2 * r, r, 1};
}

SchemeContext setup(const SchemeParams& params) {
    SpaceSpec space(params.field, params.nu, 2);
    const Field& f = params.field;
    const std::size_t d = space.dim();
    const unsigned n = params.receivers, nu = params.nu;

    std::vector<Vec> anchor_rows;
    for (unsigned i = 0; i < n; ++i) anchor_rows.push_back(unit_vector(d, i));
    Subspace anchor = canonicalize(f, anchor_rows, d);

    Subspace anchor_perp = perp(f, anchor, space.form());
    // Cross-check against the explicit basis e_1..e_nu, e_{nu+n+1}..e_{2nu+2}.
    std::vector<Vec> explicit_rows;
    for (unsigned i = 0; i < nu; ++i) explicit_rows.push_back(unit_vector(d, i));
    for (std::size_t i = nu + n; i < d; ++i) explicit_rows.push_back(unit_vector(d, i));
    if (anchor_perp != canonicalize(f, explicit_rows, d)) {
        throw Error("setup: perp disagrees with the explicit complement basis");
    }
    return SchemeContext{params, std::move(space), std::move(anchor), std::move(anchor_perp)};
}

Vec rule_row(const SchemeContext& ctx, unsigned i, std::span<const Elem> mid, Elem special) {
    check_receiver_index(ctx, i);
    const unsigned n = ctx.n(), nu = ctx.nu();
    if (mid.size() != nu - n) throw DimensionMismatch("rule_row: mid block size");
    Vec v(ctx.dim(), 0);
    std::copy(mid.begin(), mid.end(), v.begin() + n);
    v[nu + i - 1] = 1;
    v[ctx.space.special_index()] = special;
    return v;
}

EncodingRule make_encoding_rule(const SchemeContext& ctx, Mat mid, std::vector<Elem> special) {
    const unsigned n = ctx.n(), nu = ctx.nu();
    if (mid.nrows != n || mid.ncols != nu - n || special.size() != n) {
        throw DimensionMismatch("make_encoding_rule: block shapes");
    }
    const Field& f = ctx.field();
    std::vector<Vec> rows;
    for (unsigned i = 0; i < n; ++i) rows.push_back(unit_vector(ctx.dim(), i));
    for (unsigned i = 1; i <= n; ++i) {
        rows.push_back(rule_row(ctx, i, mid.row(i - 1), special[i - 1]));
    }
    Subspace sub = canonicalize(f, rows, ctx.dim());
    if (sub.dim() != 2 * n) throw TypeCheckFailed("encoding rule: dimension != 2n");
    if (classify(ctx.space, sub) != ctx.rule_type()) {
        throw TypeCheckFailed("encoding rule misclassified");
    }
    if (intersect(f, sub, ctx.anchor_perp) != ctx.anchor) {
        throw TypeCheckFailed("encoding rule: intersection with the complement is not the anchor");
    }
    return EncodingRule{std::move(mid), std::move(special), std::move(sub)};
}

EncodingRule sample_encoding_rule(const SchemeContext& ctx, Xoshiro256StarStar& rng) {
    const unsigned n = ctx.n(), nu = ctx.nu();
    const unsigned q = ctx.field().order();
    Mat mid(n, nu - n);
    for (std::size_t i = 0; i < mid.a.size(); ++i) mid.a[i] = static_cast<Elem>(rng.below(q));
    std::vector<Elem> special(n);
    for (unsigned i = 0; i < n; ++i) special[i] = static_cast<Elem>(rng.below(q));
    return make_encoding_rule(ctx, std::move(mid), std::move(special));
}

EncodingRule rule_from_subspace(const SchemeContext& ctx, const Subspace& s) {
    const unsigned n = ctx.n(), nu = ctx.nu();
    if (s.ambient != ctx.dim() || s.dim() != 2 * n) {
        throw MalformedRule("encoding rule: wrong ambient or dimension");
    }
    Mat mid(n, nu - n);
    std::vector<Elem> special(n);
    for (unsigned k = 0; k < n; ++k) {
        const auto row = s.basis.row(k);
        const Vec unit = unit_vector(ctx.dim(), k);
        if (!std::equal(row.begin(), row.end(), unit.begin())) {
            throw MalformedRule("encoding rule: anchor block not in normalized form");
        }
    }
    for (unsigned i = 0; i < n; ++i) {
        const auto row = s.basis.row(n + i);
        if (row[nu + i] != 1) throw MalformedRule("encoding rule: missing unit block");
        for (unsigned j = nu + n; j < 2 * nu; ++j) {
            if (row[j] != 0) throw MalformedRule("encoding rule: nonzero right middle block");
        }
        if (row[2 * nu + 1] != 0) throw MalformedRule("encoding rule: nonzero tail coordinate");
        for (unsigned j = 0; j < nu - n; ++j) mid.at(i, j) = row[n + j];
        special[i] = row[2 * nu];
    }
    EncodingRule rebuilt = make_encoding_rule(ctx, std::move(mid), std::move(special));
    if (rebuilt.subspace != s) throw MalformedRule("encoding rule: not in the normalized family");
    return rebuilt;
}

ReceiverKey make_receiver_key(const SchemeContext& ctx, unsigned i, Vec mid, Elem special) {
    check_receiver_index(ctx, i);
    const Field& f = ctx.field();
    const unsigned n = ctx.n();
    Vec w = rule_row(ctx, i, mid, special);
    std::vector<Vec> rows;
    for (unsigned k = 0; k < n; ++k) rows.push_back(unit_vector(ctx.dim(), k));
    rows.push_back(w);
    Subspace sub = canonicalize(f, rows, ctx.dim());
    if (sub.dim() != n + 1) throw TypeCheckFailed("receiver key: dimension != n+1");
    for (unsigned j = 1; j <= n; ++j) {
        if (j == i) continue;
        if (pair_under_form(ctx, w, unit_vector(ctx.dim(), j - 1)) != 0) {
            throw TypeCheckFailed("receiver key: not orthogonal to the other anchor vectors");
        }
    }
    if (contains(f, sub, std::span<const Elem>(ctx.space.special_vector()))) {
        throw TypeCheckFailed("receiver key: contains the distinguished vector");
    }
    return ReceiverKey{i, std::move(mid), special, std::move(sub)};
}

ReceiverKey derive_receiver_key(const SchemeContext& ctx, const EncodingRule& rule, unsigned i) {
    check_receiver_index(ctx, i);
    const auto row = rule.mid.row(i - 1);
    return make_receiver_key(ctx, i, Vec(row.begin(), row.end()), rule.special[i - 1]);
}

ReceiverKey key_from_subspace(const SchemeContext& ctx, unsigned i, const Subspace& s) {
    check_receiver_index(ctx, i);
    const unsigned n = ctx.n(), nu = ctx.nu();
    if (s.ambient != ctx.dim() || s.dim() != n + 1) {
        throw MalformedRule("receiver key: wrong ambient or dimension");
    }
    const auto row = s.basis.row(n);
    if (row[nu + i - 1] != 1) throw MalformedRule("receiver key: unit block mismatch");
    Vec mid(row.begin() + n, row.begin() + nu);
    ReceiverKey rebuilt = make_receiver_key(ctx, i, std::move(mid), row[2 * nu]);
    if (rebuilt.subspace != s) throw MalformedRule("receiver key: not in the normalized family");
    return rebuilt;
}

SourceState source_state_from_subspace(const SchemeContext& ctx, const Subspace& s) {
    const Field& f = ctx.field();
    if (s.ambient != ctx.dim()) throw DimensionMismatch("source state: ambient mismatch");
    if (s.dim() != 2 * ctx.r() - ctx.n() + 1 || classify(ctx.space, s) != ctx.source_type()) {
        throw TypeCheckFailed("source state misclassified: " + classify(ctx.space, s).str());
    }
    if (!contains(f, s, ctx.anchor) || !contains(f, ctx.anchor_perp, s)) {
        throw TypeCheckFailed("source state: not between anchor and its complement");
    }
    return SourceState{s};
}

namespace detail {

std::uint64_t gaussian_binomial(unsigned m, unsigned k, std::uint64_t q) {
    if (k > m) return 0;
    // [m k]_q = prod_{i=0}^{k-1} (q^(m-i) - 1) / (q^(i+1) - 1), exact at each step.
    unsigned __int128 acc = 1;
    const unsigned __int128 cap = std::numeric_limits<std::uint64_t>::max();
    for (unsigned i = 0; i < k; ++i) {
        unsigned __int128 num = 1;
        for (unsigned t = 0; t < m - i; ++t) num *= q;
        num -= 1;
        unsigned __int128 den = 1;
        for (unsigned t = 0; t < i + 1; ++t) den *= q;
        den -= 1;
        acc = acc * num / den;
        if (acc > cap) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(acc);
}

std::vector<Subspace> enumerate_source_subspaces(const SchemeContext& ctx) {
    const Field& f = ctx.field();
    const unsigned n = ctx.n(), nu = ctx.nu(), r = ctx.r();
    const std::size_t dim = ctx.dim();
    // Complement basis of (anchor + e_{2nu+1}) inside anchor_perp.
    std::vector<std::size_t> cols;
    for (unsigned j = n; j < nu; ++j) cols.push_back(j);
    for (unsigned j = nu + n; j < 2 * nu; ++j) cols.push_back(j);
    cols.push_back(2 * std::size_t{nu} + 1);
    const unsigned D = static_cast<unsigned>(cols.size());  // 2(nu-n)+1
    const unsigned d = 2 * (r - n);

    std::vector<Subspace> out;
    std::vector<Vec> rows(n + d + 1, Vec(dim, 0));
    for (unsigned i = 0; i < n; ++i) rows[i][i] = 1;
    rows[n + d][ctx.space.special_index()] = 1;

    const SubspaceType want = ctx.source_type();
    detail::for_each_rref_matrix(f, D, d, [&](const Mat& qm) {
        for (unsigned i = 0; i < d; ++i) {
            Vec& row = rows[n + i];
            std::fill(row.begin(), row.end(), 0);
            for (unsigned j = 0; j < D; ++j) row[cols[j]] = qm.at(i, j);
        }
        Subspace s = canonicalize(f, rows, dim);
        if (s.dim() == 2 * r - n + 1 && classify(ctx.space, s) == want) {
            out.push_back(std::move(s));
        }
    });
    return out;
}

}  // namespace detail

SourceState sample_source_state(const SchemeContext& ctx, Xoshiro256StarStar& rng) {
    const Field& f = ctx.field();
    const unsigned n = ctx.n(), nu = ctx.nu(), r = ctx.r();
    const unsigned q = f.order();
    const std::uint64_t candidates =
        detail::gaussian_binomial(2 * (nu - n) + 1, 2 * (r - n), q);
    if (candidates <= kSamplingEnumCap) {
        const std::vector<Subspace> all = detail::enumerate_source_subspaces(ctx);
        return SourceState{all[static_cast<std::size_t>(rng.below(all.size()))]};
    }
    // Rejection path: random middle blocks until they span a nondegenerate
    // alternate subspace of full dimension.
    const unsigned d = 2 * (r - n);
    const SubspaceType middle_want{d, d, r - n, 0};
    for (unsigned attempt = 0; attempt < kSamplingAttemptCap; ++attempt) {
        std::vector<Vec> qrows(d, Vec(ctx.dim(), 0));
        for (unsigned i = 0; i < d; ++i) {
            for (unsigned j = 0; j < nu - n; ++j) {
                qrows[i][n + j] = static_cast<Elem>(rng.below(q));
                qrows[i][nu + n + j] = static_cast<Elem>(rng.below(q));
            }
        }
        Subspace middle = canonicalize(f, qrows, ctx.dim());
        if (middle.dim() != d || classify(ctx.space, middle) != middle_want) continue;
        std::vector<Vec> rows;
        for (unsigned i = 0; i < n; ++i) rows.push_back(unit_vector(ctx.dim(), i));
        rows.insert(rows.end(), qrows.begin(), qrows.end());
        rows.push_back(ctx.space.special_vector());
        return source_state_from_subspace(ctx, canonicalize(f, rows, ctx.dim()));
    }
    throw SamplingExhausted("source-state sampling: attempt cap reached");
}

Message message_from_subspace(const SchemeContext& ctx, const Subspace& s) {
    const Field& f = ctx.field();
    if (s.ambient != ctx.dim()) throw MalformedMessage("message: ambient mismatch");
    if (s.dim() != 2 * ctx.r() + 1) throw MalformedMessage("message: dimension != 2r+1");
    if (!contains(f, s, ctx.anchor)) throw MalformedMessage("message: anchor not contained");
    if (classify(ctx.space, s) != ctx.message_type()) {
        throw MalformedMessage("message misclassified: " + classify(ctx.space, s).str());
    }
    return Message{s};
}

Message encode(const SchemeContext& ctx, const SourceState& s, const EncodingRule& rule) {
    const Field& f = ctx.field();
    Subspace m = sum(f, s.subspace, rule.subspace);
    if (m.dim() != 2 * ctx.r() + 1 || classify(ctx.space, m) != ctx.message_type()) {
        throw TypeCheckFailed("encode: result misclassified: " + classify(ctx.space, m).str());
    }
    return Message{std::move(m)};
}

bool verify(const SchemeContext& ctx, const Message& m, const ReceiverKey& key) {
    const Message checked = message_from_subspace(ctx, m.subspace);
    return contains(ctx.field(), checked.subspace, key.subspace);
}

SourceState decode(const SchemeContext& ctx, const Message& m) {
    const Message checked = message_from_subspace(ctx, m.subspace);
    Subspace s = intersect(ctx.field(), checked.subspace, ctx.anchor_perp);
    return source_state_from_subspace(ctx, std::move(s));
}

}  // namespace mra
