#include "histcad/nlt.hpp"

#include "histcad/format.hpp"
#include "histcad/numfmt.hpp"
#include "histcad/nlt_templates.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace histcad {

namespace {

using nlohmann::json;

const json& templates() {
    static const json t = json::parse(detail::kNltTemplatesJson);
    return t;
}

std::string fill(std::string_view key, const std::map<std::string, std::string>& values) {
    const std::string pattern = templates().at("sentences").at(std::string(key)).get<std::string>();
    std::string out;
    std::size_t i = 0;
    while (i < pattern.size()) {
        const std::size_t open = pattern.find('{', i);
        if (open == std::string::npos) {
            out.append(pattern, i);
            break;
        }
        const std::size_t close = pattern.find('}', open);
        out.append(pattern, i, open - i);
        const auto it = values.find(pattern.substr(open + 1, close - open - 1));
        if (it == values.end()) throw std::logic_error("template " + std::string(key) + " has no value for a field");
        out += it->second;
        i = close + 1;
    }
    return out;
}

std::string plural(std::size_t n, const std::string& word) {
    if (n == 0) return "no " + word + "s";
    return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

std::string point(const Vec2& p) { return "(" + format_number(p.x()) + ", " + format_number(p.y()) + ")"; }
std::string point(const Vec3& p) {
    return "(" + format_number(p.x()) + ", " + format_number(p.y()) + ", " + format_number(p.z()) + ")";
}

/// Derived quantities carry floating-point noise; they are snapped to a grid
/// relative to the model size and printed with six significant digits.
struct Derived {
    double step;

    std::string num(double v) const { return format_significant(quantize(v, step), 6); }
    std::string vec(const Vec3& v) const { return "(" + num(v.x()) + ", " + num(v.y()) + ", " + num(v.z()) + ")"; }
};

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += i + 1 == items.size() ? (items.size() > 2 ? ", and " : " and ") : ", ";
        out += items[i];
    }
    return out;
}

/// Edge names in traversal order, rotated to start at the smallest id so the
/// wording does not depend on where tracing began.
std::string loop_edges(const Loop& loop) {
    std::vector<std::string> names;
    for (const auto& e : loop.edges) names.push_back(e.reversed ? e.id + " (reversed)" : e.id);
    std::size_t first = 0;
    for (std::size_t k = 1; k < loop.edges.size(); ++k) {
        if (loop.edges[k].id < loop.edges[first].id) first = k;
    }
    std::rotate(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(first), names.end());
    return join(names);
}

std::string primitive_sentence(const Primitive& p) {
    return std::visit(
        [&](const auto& c) -> std::string {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Line>) {
                return fill("line", {{"id", p.id}, {"start", point(c.start)}, {"end", point(c.end)}});
            } else if constexpr (std::is_same_v<T, Circle>) {
                return fill("circle", {{"id", p.id}, {"center", point(c.center)}, {"radius", format_number(c.radius)}});
            } else {
                return fill("arc",
                            {{"id", p.id}, {"start", point(c.start)}, {"mid", point(c.mid)}, {"end", point(c.end)}});
            }
        },
        p.curve);
}

std::string constraint_sentence(const Constraint& c) {
    std::map<std::string, std::string> v;
    v["a"] = c.refs.empty() ? std::string() : c.refs[0].str();
    if (c.refs.size() > 1) v["b"] = c.refs[1].str();
    if (c.kind == ConstraintKind::Fix) {
        std::vector<std::string> nums;
        for (const double x : c.values) nums.push_back(format_number(x));
        std::string values = "(";
        for (std::size_t i = 0; i < nums.size(); ++i) values += (i ? ", " : "") + nums[i];
        v["values"] = values + ")";
    }
    return fill(constraint_kind_name(c.kind), v);
}

std::string extrusion_sentence(const Extrusion& ex) {
    if (const auto* lin = std::get_if<LinearExtrusion>(&ex)) {
        std::map<std::string, std::string> v{{"length", format_number(lin->length)},
                                             {"direction", point(lin->direction)}};
        if (lin->symmetric) return fill("extrude_symmetric", v);
        if (lin->back_length > 0.0) {
            v["back"] = format_number(lin->back_length);
            return fill("extrude_two_sided", v);
        }
        return fill("extrude", v);
    }
    const auto& rot = std::get<RotatedExtrusion>(ex);
    return fill("revolve", {{"point", point(rot.axis_point)},
                            {"direction", point(rot.axis_dir)},
                            {"start", format_number(rot.start_angle)},
                            {"end", format_number(rot.end_angle)}});
}

std::string boolean_words(BooleanKind k) {
    switch (k) {
    case BooleanKind::NewBody: return "new body";
    case BooleanKind::Join: return "join";
    case BooleanKind::Subtract: return "subtract";
    case BooleanKind::Intersect: return "intersect";
    }
    return "";
}

}  // namespace

std::string Nlt::text() const {
    std::string out;
    for (const auto& s : sentences) {
        out += s.text;
        out += '\n';
    }
    return out;
}

std::size_t Nlt::count(SentenceKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(sentences.begin(), sentences.end(), [&](const NltSentence& s) { return s.kind == kind; }));
}

int nlt_template_version() { return templates().at("version").get<int>(); }

Nlt build_nlt(const Document& input, const DocumentAnalysis& analysis) {
    const Document doc = canonicalize(input);
    const Derived derived{1e-9 * std::max(model_extent(doc), 1e-300)};
    Nlt nlt;
    nlt.part_count = doc.parts.size();
    const auto add = [&](SentenceKind kind, std::size_t part, std::string text) {
        nlt.sentences.push_back({kind, part, std::move(text)});
    };

    add(SentenceKind::Document, 0, fill("document", {{"parts", plural(doc.parts.size(), "part")}}));
    for (std::size_t i = 0; i < doc.parts.size(); ++i) {
        const Part& part = doc.parts[i];
        const std::size_t n = i + 1;
        add(SentenceKind::Part, n, fill("part", {{"index", std::to_string(n)}}));
        add(SentenceKind::Plane, n,
            fill("plane", {{"origin", point(part.sketch.plane.translation)},
                           {"euler", point(part.sketch.plane.euler)},
                           {"normal", derived.vec(part.sketch.plane.normal())}}));
        for (const auto& p : part.sketch.primitives) add(SentenceKind::Primitive, n, primitive_sentence(p));

        const PartAnalysis* pa = i < analysis.parts.size() ? &analysis.parts[i] : nullptr;
        if (pa == nullptr || (!pa->error.empty() && pa->dict.outers.empty())) {
            const std::string error = pa == nullptr ? "not analyzed" : pa->error;
            add(SentenceKind::Loop, n, fill("analysis_failed", {{"error", error}}));
        } else {
            add(SentenceKind::Loop, n,
                fill("loop_summary", {{"outers", plural(pa->dict.outers.size(), "outer loop")},
                                      {"holes", plural(pa->dict.hole_count(), "hole")}}));
            for (const auto& o : pa->dict.outers) {
                add(SentenceKind::Loop, n,
                    fill("outer_loop",
                         {{"name", o.name}, {"edges", loop_edges(o.loop)}, {"area", derived.num(o.loop.area)}}));
                for (const auto& h : o.holes) {
                    add(SentenceKind::Loop, n,
                        fill("hole_loop", {{"name", h.name},
                                           {"outer", o.name},
                                           {"edges", loop_edges(h.loop)},
                                           {"area", derived.num(h.loop.area)}}));
                }
            }
            if (!pa->loops.dangling.empty()) {
                std::vector<std::string> ids = pa->loops.dangling;
                std::sort(ids.begin(), ids.end());
                add(SentenceKind::Loop, n, fill("dangling", {{"ids", join(ids)}}));
            }
        }

        for (const auto& c : part.sketch.constraints) add(SentenceKind::Constraint, n, constraint_sentence(c));
        add(SentenceKind::Extrusion, n, extrusion_sentence(part.extrusion));
        if (pa != nullptr && pa->obb) {
            add(SentenceKind::Extrusion, n,
                fill("bounding_box",
                     {{"center", derived.vec(pa->obb->center)}, {"size", derived.vec(2.0 * pa->obb->half_extents)}}));
        }
        add(SentenceKind::Boolean, n, fill("boolean", {{"op", boolean_words(part.boolean)}}));
    }

    if (doc.parts.size() > 1) {
        add(SentenceKind::Assembly, 0, fill("assembly", {}));
        for (const auto& r : analysis.relations.entries) {
            if (r.i >= r.j) continue;
            std::map<std::string, std::string> v{
                {"i", std::to_string(r.i + 1)}, {"j", std::to_string(r.j + 1)}, {"type", std::string(rel_type_name(r.type))}};
            if (r.labels.empty()) {
                add(SentenceKind::Relation, 0, fill("relation_aligned", v));
            } else {
                std::vector<std::string> labels;
                for (const auto d : r.labels) labels.emplace_back(direction_name(d));
                v["labels"] = join(labels);
                add(SentenceKind::Relation, 0, fill("relation", v));
            }
        }
    }
    return nlt;
}

Nlt build_nlt(const Document& doc) {
    const Document canonical = canonicalize(doc);
    return build_nlt(canonical, analyze_document(canonical));
}

// ---------------------------------------------------------------------------

std::string_view task_name(AnnotationTask task) {
    switch (task) {
    case AnnotationTask::ModelingProcess: return "process";
    case AnnotationTask::GeometricStructure: return "structure";
    case AnnotationTask::FunctionalType: return "function";
    }
    return "";
}

std::optional<AnnotationTask> task_from_name(std::string_view name) {
    for (const auto t : {AnnotationTask::ModelingProcess, AnnotationTask::GeometricStructure,
                         AnnotationTask::FunctionalType}) {
        if (task_name(t) == name) return t;
    }
    return std::nullopt;
}

const std::string& prompt_template(AnnotationTask task) {
    static const std::array<std::string, 3> prompts = [] {
        const json& p = templates().at("prompts");
        return std::array<std::string, 3>{p.at("process").get<std::string>(), p.at("structure").get<std::string>(),
                                          p.at("function").get<std::string>()};
    }();
    return prompts[static_cast<int>(task)];
}

std::string build_prompt(std::string_view nlt_text, AnnotationTask task, bool multi_part) {
    std::string body(nlt_text);
    while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
    std::string out = prompt_template(task);
    if (!multi_part) {
        const std::string multi = templates().at("prompt_subject").at("multi").get<std::string>();
        const std::string single = templates().at("prompt_subject").at("single").get<std::string>();
        if (const auto pos = out.find(multi); pos != std::string::npos) out.replace(pos, multi.size(), single);
    }
    const std::string placeholder = "{NLT}";
    if (const auto pos = out.find(placeholder); pos != std::string::npos) out.replace(pos, placeholder.size(), body);
    return out;
}

std::string build_prompt(const Nlt& nlt, AnnotationTask task) {
    return build_prompt(nlt.text(), task, nlt.part_count > 1);
}

// ---------------------------------------------------------------------------

std::string chat_request_body(const ChatRequest& request) {
    nlohmann::ordered_json body;
    body["model"] = request.model;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", request.prompt}}});
    return body.dump();
}

std::string parse_chat_response(std::string_view body) {
    json j;
    try {
        j = json::parse(body.begin(), body.end());
        const json& content = j.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const json::exception& e) {
        throw TransportFailure(std::string("malformed chat response: ") + e.what(), false);
    }
}

namespace {

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

AnnotationRecord annotate_prompt(const std::string& prompt, AnnotationTask task, ChatTransport& transport,
                                 const AnnotateOptions& options, std::string document) {
    const ChatRequest request{options.model, prompt};
    AnnotationRecord rec;
    rec.document = std::move(document);
    rec.task = task;
    rec.model = options.model;
    rec.request_hash = sha256_hex(chat_request_body(request));

    const int attempts = std::max(1, options.max_attempts);
    std::chrono::milliseconds delay = options.base_delay;
    for (int attempt = 1;; ++attempt) {
        rec.attempts = attempt;
        try {
            rec.text = transport.complete(request);
            break;
        } catch (const TransportFailure& e) {
            if (!e.transient() || attempt >= attempts) {
                throw TransportFailure("gave up after " + std::to_string(attempt) + " attempt(s); last error " +
                                           e.what(),
                                       false);
            }
        }
        if (options.sleep) {
            options.sleep(delay);
        } else {
            std::this_thread::sleep_for(delay);
        }
        delay *= 2;
    }
    if (blank(rec.text)) throw Error(ErrorCode::EmptyResponse, "completion for " + rec.request_hash + " is empty");
    rec.timestamp = options.clock ? options.clock() : utc_now();
    return rec;
}

AnnotationRecord annotate(const Document& doc, AnnotationTask task, ChatTransport& transport,
                          const AnnotateOptions& options, std::string document) {
    return annotate_prompt(build_prompt(build_nlt(doc), task), task, transport, options, std::move(document));
}

std::vector<AnnotationOutcome> annotate_batch(const std::vector<std::pair<std::string, Document>>& docs,
                                              AnnotationTask task, ChatTransport& transport,
                                              const AnnotateOptions& options, std::size_t concurrency) {
    std::vector<AnnotationOutcome> out(docs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < docs.size(); i = next++) {
            out[i].document = docs[i].first;
            try {
                out[i].record = annotate(docs[i].second, task, transport, options, docs[i].first);
            } catch (const Error& e) {
                out[i].error = e.what();
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(concurrency, docs.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

std::string annotation_record_json(const AnnotationRecord& record) {
    nlohmann::ordered_json j;
    j["document"] = record.document;
    j["task"] = task_name(record.task);
    j["request_hash"] = record.request_hash;
    j["model"] = record.model;
    j["timestamp"] = record.timestamp;
    j["attempts"] = record.attempts;
    j["text"] = record.text;
    return j.dump();
}

AnnotationRecord annotation_record_from_json(std::string_view line) {
    const json j = json::parse(line.begin(), line.end());
    AnnotationRecord r;
    r.document = j.at("document").get<std::string>();
    const auto task = task_from_name(j.at("task").get<std::string>());
    if (!task) throw Error(ErrorCode::SchemaError, "unknown annotation task");
    r.task = *task;
    r.request_hash = j.at("request_hash").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.attempts = j.at("attempts").get<int>();
    r.text = j.at("text").get<std::string>();
    return r;
}

void append_annotation_log(const std::string& path, const std::vector<AnnotationRecord>& records) {
    static std::mutex mutex;
    const std::lock_guard<std::mutex> lock(mutex);
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open annotation log " + path);
    for (const auto& r : records) out << annotation_record_json(r) << '\n';
}

}  // namespace histcad
