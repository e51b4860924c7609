#include "mra/serialize.hpp"

#include <json.hpp>

namespace mra {
namespace {

using Json = nlohmann::ordered_json;

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse(const std::string& text) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SerializationError("invalid JSON");
    return j;
}

void require_format(const Json& j) {
    if (!j.contains("format") || !j["format"].is_number_integer() || j["format"] != 1) {
        throw SerializationError("missing or unsupported \"format\" (expected 1)");
    }
}

Json subspace_json(const Subspace& s) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < s.dim(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < s.ambient; ++j) row.push_back(s.basis.at(i, j));
        rows.push_back(std::move(row));
    }
    return Json{{"ambient_dim", s.ambient}, {"rows", std::move(rows)}};
}

Subspace subspace_from(const Field& f, const Json& j, const ReadOptions& opt,
                       const char* what) {
    if (!j.is_object() || !j.contains("ambient_dim") || !j.contains("rows")) {
        throw SerializationError(std::string(what) + ": expected {ambient_dim, rows}");
    }
    const std::size_t ambient = j["ambient_dim"].get<std::size_t>();
    std::vector<Vec> rows;
    for (const Json& jr : j["rows"]) {
        Vec row;
        for (const Json& je : jr) {
            const std::int64_t v = je.get<std::int64_t>();
            if (v < 0 || v >= static_cast<std::int64_t>(f.order())) {
                throw SerializationError(std::string(what) + ": element out of range");
            }
            row.push_back(static_cast<Elem>(v));
        }
        if (row.size() != ambient) {
            throw SerializationError(std::string(what) + ": row length != ambient_dim");
        }
        rows.push_back(std::move(row));
    }
    const Mat raw = Mat::from_rows(rows);
    Subspace s = canonicalize(f, raw, ambient);
    if (s.basis != raw) {
        if (opt.strict) {
            throw SerializationError(std::string(what) +
                                     ": rows are not a canonical reduced-echelon basis");
        }
        if (opt.warnings) {
            opt.warnings->push_back(std::string(what) +
                                    ": non-canonical rows re-canonicalized");
        }
    }
    return s;
}

Json params_json(const SchemeParams& p) {
    return Json{{"format", 1},
                {"field", Json{{"k", p.field.degree()}, {"poly", p.field.modulus()}}},
                {"nu", p.nu},
                {"n", p.receivers},
                {"r", p.rank}};
}

SchemeParams params_from(const Json& j) {
    if (!j.contains("field") || !j["field"].contains("k") || !j["field"].contains("poly")) {
        throw SerializationError("params: expected field {k, poly}");
    }
    const Field field(j["field"]["k"].get<unsigned>(), j["field"]["poly"].get<std::uint32_t>());
    return validate_params(field, j["nu"].get<unsigned>(), j["n"].get<unsigned>(),
                           j["r"].get<unsigned>());
}

std::string csv_escape(const std::string& s) {
    bool need = s.find_first_of(",\"\r\n") != std::string::npos;
    if (!need) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace

std::string to_json(const SchemeParams& params) { return dump(params_json(params)); }

SchemeParams params_from_json(const std::string& text) {
    const Json j = parse(text);
    require_format(j);
    return params_from(j);
}

std::string to_json(const Subspace& s) { return dump(subspace_json(s)); }

SchemeContext context_from_params(const SchemeParams& params) { return setup(params); }

std::string to_json(const SchemeContext& ctx, const KeyFile& kf) {
    (void)ctx;
    Json j = params_json(kf.params);
    Json sender{{"role", "sender"}};
    Json mid = Json::array();
    for (std::size_t i = 0; i < kf.sender.mid.nrows; ++i) {
        Json row = Json::array();
        for (std::size_t c = 0; c < kf.sender.mid.ncols; ++c) row.push_back(kf.sender.mid.at(i, c));
        mid.push_back(std::move(row));
    }
    sender["R2"] = std::move(mid);
    sender["R5"] = kf.sender.special;
    sender["subspace"] = subspace_json(kf.sender.subspace);
    Json receivers = Json::array();
    for (const ReceiverKey& k : kf.receivers) {
        receivers.push_back(Json{{"role", "receiver"},
                                 {"index", k.index},
                                 {"subspace", subspace_json(k.subspace)}});
    }
    return dump(Json{{"format", 1},
                     {"params", params_json(kf.params)},
                     {"sender", std::move(sender)},
                     {"receivers", std::move(receivers)}});
}

KeyFile key_file_from_json(const std::string& text, const ReadOptions& opt) {
    const Json j = parse(text);
    require_format(j);
    if (!j.contains("params")) throw SerializationError("key file: missing params");
    KeyFile kf{params_from(j["params"]), {}, {}};
    const SchemeContext ctx = setup(kf.params);
    const Field& f = kf.params.field;
    if (!j.contains("sender") || !j["sender"].contains("R2") || !j["sender"].contains("R5")) {
        throw SerializationError("key file: missing sender blocks");
    }
    const unsigned n = ctx.n(), w = ctx.nu() - ctx.n();
    Mat mid(n, w);
    const Json& jr2 = j["sender"]["R2"];
    if (jr2.size() != n) throw SerializationError("key file: R2 must have n rows");
    for (unsigned i = 0; i < n; ++i) {
        if (jr2[i].size() != w) throw SerializationError("key file: R2 row width != nu-n");
        for (unsigned c = 0; c < w; ++c) {
            const std::int64_t v = jr2[i][c].get<std::int64_t>();
            if (v < 0 || v >= static_cast<std::int64_t>(f.order())) {
                throw SerializationError("key file: R2 element out of range");
            }
            mid.at(i, c) = static_cast<Elem>(v);
        }
    }
    std::vector<Elem> special;
    for (const Json& je : j["sender"]["R5"]) {
        const std::int64_t v = je.get<std::int64_t>();
        if (v < 0 || v >= static_cast<std::int64_t>(f.order())) {
            throw SerializationError("key file: R5 element out of range");
        }
        special.push_back(static_cast<Elem>(v));
    }
    if (special.size() != n) throw SerializationError("key file: R5 must have n entries");
    kf.sender = make_encoding_rule(ctx, std::move(mid), std::move(special));
    if (j["sender"].contains("subspace")) {
        const Subspace s = subspace_from(f, j["sender"]["subspace"], opt, "sender subspace");
        if (s != kf.sender.subspace) {
            throw SerializationError("key file: sender subspace disagrees with R2/R5 blocks");
        }
    }
    if (j.contains("receivers")) {
        for (const Json& jk : j["receivers"]) {
            const unsigned index = jk["index"].get<unsigned>();
            const Subspace s = subspace_from(f, jk["subspace"], opt, "receiver subspace");
            kf.receivers.push_back(key_from_subspace(ctx, index, s));
        }
    }
    return kf;
}

std::string to_json(const SchemeContext& ctx, const MessageFile& mf) {
    (void)ctx;
    return dump(Json{{"format", 1},
                     {"params", params_json(mf.params)},
                     {"subspace", subspace_json(mf.message.subspace)}});
}

MessageFile message_file_from_json(const std::string& text, const ReadOptions& opt) {
    const Json j = parse(text);
    require_format(j);
    if (!j.contains("params") || !j.contains("subspace")) {
        throw SerializationError("message file: expected {params, subspace}");
    }
    MessageFile mf{params_from(j["params"]), {}};
    const SchemeContext ctx = setup(mf.params);
    const Subspace s = subspace_from(mf.params.field, j["subspace"], opt, "message subspace");
    mf.message = message_from_subspace(ctx, s);
    return mf;
}

std::string to_json(const SchemeContext& ctx, const SourceFile& sf) {
    (void)ctx;
    return dump(Json{{"format", 1},
                     {"params", params_json(sf.params)},
                     {"role", "source"},
                     {"subspace", subspace_json(sf.state.subspace)}});
}

SourceFile source_file_from_json(const std::string& text, const ReadOptions& opt) {
    const Json j = parse(text);
    require_format(j);
    if (!j.contains("params") || !j.contains("subspace")) {
        throw SerializationError("source file: expected {params, subspace}");
    }
    SourceFile sf{params_from(j["params"]), {}};
    const SchemeContext ctx = setup(sf.params);
    const Subspace s = subspace_from(sf.params.field, j["subspace"], opt, "source subspace");
    sf.state = source_state_from_subspace(ctx, s);
    return sf;
}

std::string to_json(const AuditReport& report) {
    Json checks = Json::array();
    for (const CheckResult& c : report.checks) {
        Json jc{{"id", c.id},
                {"description", c.description},
                {"formula", c.formula},
                {"expected", c.expected},
                {"actual", c.actual}};
        if (c.pass.has_value()) {
            jc["pass"] = *c.pass;
        } else {
            jc["pass"] = nullptr;
        }
        jc["notes"] = c.notes;
        checks.push_back(std::move(jc));
    }
    Json probs = Json::array();
    for (const ProbabilityRecord& p : report.probabilities) {
        probs.push_back(Json{{"check", p.check_id},
                             {"l", p.l},
                             {"target", p.target},
                             {"model", p.model},
                             {"method", p.method},
                             {"value", p.value.str()},
                             {"formula_value", p.formula_value}});
    }
    Json mult = Json::array();
    for (const auto& [value, count] : report.multiplicity_profile) {
        mult.push_back(Json{{"rules_in_message", value}, {"messages", count}});
    }
    Json pairs = Json::array();
    for (const auto& [k, count, npairs] : report.pair_profile) {
        pairs.push_back(Json{{"k", k}, {"rule_count", count}, {"pairs", npairs}});
    }
    return dump(Json{{"format", 1},
                     {"params", params_json(report.params)},
                     {"threads", report.threads},
                     {"budget", Json{{"cap", report.budget_cap}, {"used", report.budget_used}}},
                     {"sizes", Json{{"rules", report.n_rules},
                                    {"sources", report.n_sources},
                                    {"source_candidates", report.source_candidates},
                                    {"messages", report.n_messages}}},
                     {"multiplicity_profile", std::move(mult)},
                     {"checks", std::move(checks)},
                     {"probabilities", std::move(probs)},
                     {"pair_profile", std::move(pairs)}});
}

std::string audit_report_csv(const AuditReport& report) {
    std::string out = "id,description,formula,expected,actual,pass,notes\r\n";
    for (const CheckResult& c : report.checks) {
        out += csv_escape(c.id) + "," + csv_escape(c.description) + "," + csv_escape(c.formula) +
               "," + csv_escape(c.expected) + "," + csv_escape(c.actual) + ",";
        out += c.pass.has_value() ? (*c.pass ? "true" : "false") : "n/a";
        out += "," + csv_escape(c.notes) + "\r\n";
    }
    return out;
}

}  // namespace mra
