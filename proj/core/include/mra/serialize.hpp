#pragma once

#include <string>
#include <vector>

#include "mra/census.hpp"
#include "mra/scheme.hpp"

namespace mra {

// Strict readers reject subspace rows that are not canonical RREF; lenient
// mode re-canonicalizes and appends a warning to `warnings`.
struct ReadOptions {
    bool strict = true;
    std::vector<std::string>* warnings = nullptr;
};

// All writers produce deterministic bytes: fixed key order, 2-space indent,
// trailing newline. Every file format carries "format": 1.

std::string to_json(const SchemeParams& params);
SchemeParams params_from_json(const std::string& text);

std::string to_json(const Subspace& s);

struct KeyFile {
    SchemeParams params;
    EncodingRule sender;
    std::vector<ReceiverKey> receivers;  // one per receiver, index 1..n
};
std::string to_json(const SchemeContext& ctx, const KeyFile& kf);
KeyFile key_file_from_json(const std::string& text, const ReadOptions& opt = {});

struct MessageFile {
    SchemeParams params;
    Message message;
};
std::string to_json(const SchemeContext& ctx, const MessageFile& mf);
MessageFile message_file_from_json(const std::string& text, const ReadOptions& opt = {});

struct SourceFile {
    SchemeParams params;
    SourceState state;
};
std::string to_json(const SchemeContext& ctx, const SourceFile& sf);
SourceFile source_file_from_json(const std::string& text, const ReadOptions& opt = {});

std::string to_json(const AuditReport& report);
// RFC 4180 rows, one line per check.
std::string audit_report_csv(const AuditReport& report);

// Reconstructs a context from serialized params (validate + setup).
SchemeContext context_from_params(const SchemeParams& params);

}  // namespace mra
