#pragma once

#include "histcad/analysis.hpp"
#include "histcad/error.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace histcad {

// ---------------------------------------------------------------------------
// Natural-language transcription

enum class SentenceKind { Document, Part, Plane, Primitive, Loop, Constraint, Extrusion, Boolean, Assembly, Relation };

struct NltSentence {
    SentenceKind kind;
    std::size_t part = 0;  // 1-based; 0 for document-level sentences
    std::string text;
};

struct Nlt {
    std::size_t part_count = 0;
    /// Per part: header, plane, primitives, loops, constraints, extrusion,
    /// Boolean. Then the assembly header and one sentence per unordered pair
    /// of analyzed parts.
    std::vector<NltSentence> sentences;

    /// One sentence per line, newline-terminated.
    std::string text() const;
    std::size_t count(SentenceKind kind) const;
};

/// Version of the bundled sentence and prompt templates.
int nlt_template_version();

/// Transcribes canonicalize(doc). `analysis` must come from
/// analyze_document(canonicalize(doc)).
Nlt build_nlt(const Document& doc, const DocumentAnalysis& analysis);
Nlt build_nlt(const Document& doc);

// ---------------------------------------------------------------------------
// Annotation prompts

enum class AnnotationTask { ModelingProcess, GeometricStructure, FunctionalType };

std::string_view task_name(AnnotationTask task);  // "process", "structure", "function"
std::optional<AnnotationTask> task_from_name(std::string_view name);

/// The multi-component template text, with its {NLT} placeholder.
const std::string& prompt_template(AnnotationTask task);

/// Substitutes `nlt_text` (trailing newline trimmed) into the task template.
/// Single-part models swap "multi-component assembly" for "single-part model".
std::string build_prompt(std::string_view nlt_text, AnnotationTask task, bool multi_part);
std::string build_prompt(const Nlt& nlt, AnnotationTask task);

// ---------------------------------------------------------------------------
// Chat transport

struct ChatRequest {
    std::string model;
    std::string prompt;
};

/// {"model": ..., "messages": [{"role": "user", "content": ...}]}
std::string chat_request_body(const ChatRequest& request);

/// Content of the first choice's message. Throws TransportError (not
/// transient) on a malformed body.
std::string parse_chat_response(std::string_view body);

class TransportFailure : public Error {
public:
    TransportFailure(const std::string& message, bool transient)
        : Error(ErrorCode::TransportError, message), transient_(transient) {}

    /// Worth retrying: connection failures, HTTP 429 and 5xx.
    bool transient() const noexcept { return transient_; }

private:
    bool transient_;
};

/// Single user message in, single completion text out. Implementations must
/// be safe to call from several threads at once.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// POSTs chat_request_body to `endpoint` (http:// or https:// URL including
/// the path) with a bearer token when `api_key` is non-empty.
class HttpChatTransport final : public ChatTransport {
public:
    explicit HttpChatTransport(std::string endpoint, std::string api_key = {}, int timeout_seconds = 120);

    std::string complete(const ChatRequest& request) override;

private:
    std::string base_;
    std::string path_;
    std::string api_key_;
    int timeout_seconds_;
};

/// Value of HISTCAD_API_KEY, or empty.
std::string api_key_from_environment();

// ---------------------------------------------------------------------------
// Annotation

struct AnnotateOptions {
    std::string model = "default";
    int max_attempts = 3;
    /// Delay before the second attempt; doubled for each later one.
    std::chrono::milliseconds base_delay{500};
    /// Overridable for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;
    /// Overridable for tests; defaults to the current UTC time (ISO 8601).
    std::function<std::string()> clock;
};

struct AnnotationRecord {
    std::string document;
    AnnotationTask task = AnnotationTask::ModelingProcess;
    /// SHA-256 of the request body.
    std::string request_hash;
    std::string model;
    std::string timestamp;
    int attempts = 0;
    std::string text;
};

/// Requests one completion for `prompt`. Throws TransportError once retries
/// are exhausted (or at once for a non-transient failure) and EmptyResponse
/// when the completion is blank.
AnnotationRecord annotate_prompt(const std::string& prompt, AnnotationTask task, ChatTransport& transport,
                                 const AnnotateOptions& options = {}, std::string document = {});

AnnotationRecord annotate(const Document& doc, AnnotationTask task, ChatTransport& transport,
                          const AnnotateOptions& options = {}, std::string document = {});

struct AnnotationOutcome {
    std::string document;
    std::optional<AnnotationRecord> record;
    std::string error;  // "CODE: message" when record is empty
};

/// At most `concurrency` requests in flight; results follow input order.
std::vector<AnnotationOutcome> annotate_batch(const std::vector<std::pair<std::string, Document>>& docs,
                                              AnnotationTask task, ChatTransport& transport,
                                              const AnnotateOptions& options = {}, std::size_t concurrency = 4);

/// One JSON object on a single line (schema in docs/annotations.md).
std::string annotation_record_json(const AnnotationRecord& record);
AnnotationRecord annotation_record_from_json(std::string_view line);

/// Appends one line per record.
void append_annotation_log(const std::string& path, const std::vector<AnnotationRecord>& records);

std::string sha256_hex(std::string_view data);

}  // namespace histcad
