#include "histcad/flatten.hpp"

#include "histcad/constraints.hpp"
#include "histcad/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace histcad {

namespace {

// Tolerance for deciding that two arcs lie on one circle. Circumcenters
// carry a little more rounding than raw coordinates.
constexpr double kCircleMatchFactor = 10.0;

std::int64_t qv(double v, double eps) { return std::llround(v / eps); }

bool lex_less(const Vec2& a, const Vec2& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); }

struct SegmentRef {
    std::size_t face, loop, seg;
};

// Parameter of `p` along a->b when p lies on the segment within eps, strictly
// away from both ends.
std::optional<double> interior_param_on_line(const Vec2& a, const Vec2& b, const Vec2& p, double eps) {
    const Vec2 d = b - a;
    const double len = d.norm();
    if (len <= eps) return std::nullopt;
    const double t = (p - a).dot(d) / (len * len);
    if (t * len <= eps || (1.0 - t) * len <= eps) return std::nullopt;
    if (std::abs(cross2(d, p - a)) / len > eps) return std::nullopt;
    return t;
}

bool collinear(const Line& a, const Line& b, double eps) {
    const Vec2 d = a.end - a.start;
    const double len = d.norm();
    if (len <= eps) return false;
    return std::abs(cross2(d, b.start - a.start)) / len <= eps && std::abs(cross2(d, b.end - a.start)) / len <= eps;
}

bool same_circle(const ArcParams& a, const ArcParams& b, double eps) {
    return (a.center - b.center).norm() <= eps && std::abs(a.radius - b.radius) <= eps;
}

// Parameter of `p` along `arc` when p lies on its circle strictly inside the
// span (by more than eps of arc length).
std::optional<double> interior_param_on_arc(const ArcParams& arc, const Vec2& p, double eps) {
    if (std::abs((p - arc.center).norm() - arc.radius) > eps) return std::nullopt;
    const double theta = std::atan2(p.y() - arc.center.y(), p.x() - arc.center.x());
    const double margin = arc.radius > 0.0 ? eps / arc.radius : 0.0;
    if (!angle_in_arc(arc, theta, margin)) return std::nullopt;
    return arc_param_of_angle(arc, theta);
}

std::vector<Curve> split_curve(const Curve& c, const std::vector<std::pair<double, Vec2>>& cuts, double eps,
                               const std::string& id) {
    std::vector<std::pair<double, Vec2>> sorted = cuts;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Curve> out;
    if (const auto* line = std::get_if<Line>(&c)) {
        const double len = (line->end - line->start).norm();
        if (len <= eps) {
            throw Error(ErrorCode::DegenerateSegment, "line " + id + " has zero length");
        }
        Vec2 prev = line->start;
        double prev_t = 0.0;
        for (const auto& [t, p] : sorted) {
            if ((t - prev_t) * len <= eps) continue;
            out.push_back(Line{prev, p});
            prev = p;
            prev_t = t;
        }
        out.push_back(Line{prev, line->end});
        return out;
    }
    if (const auto* arc = std::get_if<Arc>(&c)) {
        const auto ap = arc_params(arc->start, arc->mid, arc->end, eps);
        if (!ap || ap->length() <= eps) {
            throw Error(ErrorCode::DegenerateSegment, "arc " + id + " is degenerate");
        }
        const double len = ap->length();
        Vec2 prev = arc->start;
        double prev_t = 0.0;
        for (const auto& [t, p] : sorted) {
            if ((t - prev_t) * len <= eps) continue;
            out.push_back(Arc{prev, ap->point_at(0.5 * (prev_t + t)), p});
            prev = p;
            prev_t = t;
        }
        if (prev_t == 0.0) {
            out.push_back(*arc);
        } else {
            out.push_back(Arc{prev, ap->point_at(0.5 * (prev_t + 1.0)), arc->end});
        }
        return out;
    }
    const auto& circle = std::get<Circle>(c);
    if (circle.radius <= eps) {
        throw Error(ErrorCode::DegenerateSegment, "circle " + id + " has zero radius");
    }
    out.push_back(c);
    return out;
}

double scale_of(double extent) { return extent > 0.0 ? extent : 1.0; }

// True when the two curves share more than an isolated point.
bool partially_overlap(const Curve& a, const Curve& b, double eps) {
    if (curve_kind(a) != curve_kind(b)) return false;
    if (const auto* la = std::get_if<Line>(&a)) {
        const auto& lb = std::get<Line>(b);
        if (!collinear(*la, lb, eps)) return false;
        const Vec2 mid_a = 0.5 * (la->start + la->end);
        const Vec2 mid_b = 0.5 * (lb.start + lb.end);
        for (const Vec2& p : {lb.start, lb.end, mid_b}) {
            if (interior_param_on_line(la->start, la->end, p, eps)) return true;
        }
        for (const Vec2& p : {la->start, la->end, mid_a}) {
            if (interior_param_on_line(lb.start, lb.end, p, eps)) return true;
        }
        return false;
    }
    if (const auto* aa = std::get_if<Arc>(&a)) {
        const auto& ab = std::get<Arc>(b);
        const auto pa = arc_params(aa->start, aa->mid, aa->end);
        const auto pb = arc_params(ab.start, ab.mid, ab.end);
        if (!pa || !pb || !same_circle(*pa, *pb, kCircleMatchFactor * eps)) return false;
        for (const Vec2& p : {ab.start, ab.end, pb->point_at(0.5)}) {
            if (interior_param_on_arc(*pa, p, kCircleMatchFactor * eps)) return true;
        }
        for (const Vec2& p : {aa->start, aa->end, pa->point_at(0.5)}) {
            if (interior_param_on_arc(*pb, p, kCircleMatchFactor * eps)) return true;
        }
        return false;
    }
    return false;
}

}  // namespace

SegmentKey segment_key(const Curve& c, double eps_key) {
    SegmentKey key;
    key.kind = curve_kind(c);
    const auto sorted_pair = [&](const Vec2& a, const Vec2& b) {
        std::array<std::int64_t, 2> qa{qv(a.x(), eps_key), qv(a.y(), eps_key)};
        std::array<std::int64_t, 2> qb{qv(b.x(), eps_key), qv(b.y(), eps_key)};
        if (qb < qa) std::swap(qa, qb);
        return std::array<std::int64_t, 4>{qa[0], qa[1], qb[0], qb[1]};
    };
    if (const auto* line = std::get_if<Line>(&c)) {
        const auto p = sorted_pair(line->start, line->end);
        std::copy(p.begin(), p.end(), key.q.begin());
    } else if (const auto* circle = std::get_if<Circle>(&c)) {
        key.q = {qv(circle->center.x(), eps_key), qv(circle->center.y(), eps_key), qv(circle->radius, eps_key), 0, 0, 0};
    } else {
        const auto& arc = std::get<Arc>(c);
        const auto p = sorted_pair(arc.start, arc.end);
        std::copy(p.begin(), p.end(), key.q.begin());
        // The angular midpoint is independent of which interior point the
        // arc happens to store.
        const auto ap = arc_params(arc.start, arc.mid, arc.end);
        const Vec2 mid = ap ? ap->point_at(0.5) : arc.mid;
        key.q[4] = qv(mid.x(), eps_key);
        key.q[5] = qv(mid.y(), eps_key);
    }
    return key;
}

Curve canonical_orientation(const Curve& c) {
    if (std::holds_alternative<Circle>(c)) return c;
    return lex_less(curve_end(c), curve_start(c)) ? reversed_curve(c) : c;
}

void Multiset::add(const MinimalSegment& seg) {
    auto& entry = entries[segment_key(seg.curve, eps_key)];
    if (entry.multiplicity == 0) {
        entry.representative = canonical_orientation(seg.curve);
    }
    ++entry.multiplicity;
    entry.members.push_back(seg);
}

std::vector<DecomposedFace> decompose(const HierarchicalSketch& sketch) {
    const double extent = scale_of(hierarchical_extent(sketch));
    const double eps = geom_eps(extent);

    std::vector<SegmentRef> all;
    for (std::size_t f = 0; f < sketch.faces.size(); ++f) {
        for (std::size_t l = 0; l < sketch.faces[f].loops.size(); ++l) {
            for (std::size_t s = 0; s < sketch.faces[f].loops[l].segments.size(); ++s) {
                all.push_back({f, l, s});
            }
        }
    }
    const auto seg_at = [&](const SegmentRef& r) -> const LoopSegment& {
        return sketch.faces[r.face].loops[r.loop].segments[r.seg];
    };

    std::vector<std::optional<ArcParams>> arc_info(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (const auto* arc = std::get_if<Arc>(&seg_at(all[i]).curve)) {
            arc_info[i] = arc_params(arc->start, arc->mid, arc->end, eps);
        }
    }

    std::vector<DecomposedFace> out(sketch.faces.size());
    for (std::size_t f = 0; f < sketch.faces.size(); ++f) {
        out[f].resize(sketch.faces[f].loops.size());
    }

    for (std::size_t i = 0; i < all.size(); ++i) {
        const LoopSegment& seg = seg_at(all[i]);
        std::vector<std::pair<double, Vec2>> cuts;
        if (const auto* line = std::get_if<Line>(&seg.curve)) {
            for (std::size_t j = 0; j < all.size(); ++j) {
                if (j == i) continue;
                const auto* other = std::get_if<Line>(&seg_at(all[j]).curve);
                if (other == nullptr || !collinear(*line, *other, eps)) continue;
                for (const Vec2& p : {other->start, other->end}) {
                    if (const auto t = interior_param_on_line(line->start, line->end, p, eps)) {
                        cuts.emplace_back(*t, p);
                    }
                }
            }
        } else if (std::holds_alternative<Arc>(seg.curve) && arc_info[i]) {
            for (std::size_t j = 0; j < all.size(); ++j) {
                if (j == i || !arc_info[j] || !same_circle(*arc_info[i], *arc_info[j], kCircleMatchFactor * eps)) {
                    continue;
                }
                const auto& other = std::get<Arc>(seg_at(all[j]).curve);
                for (const Vec2& p : {other.start, other.end}) {
                    if (const auto t = interior_param_on_arc(*arc_info[i], p, kCircleMatchFactor * eps)) {
                        cuts.emplace_back(*t, p);
                    }
                }
            }
        }
        const std::vector<Curve> pieces = split_curve(seg.curve, cuts, eps, seg.id);
        DecomposedLoop frags;
        for (std::size_t k = 0; k < pieces.size(); ++k) {
            MinimalSegment m;
            m.source_id = seg.id;
            m.fragment = k;
            m.fragment_count = pieces.size();
            m.reversed = seg.reversed;
            m.curve = seg.reversed ? reversed_curve(pieces[k]) : pieces[k];
            frags.push_back(std::move(m));
        }
        if (seg.reversed) {
            std::reverse(frags.begin(), frags.end());
        }
        auto& loop = out[all[i].face][all[i].loop];
        loop.insert(loop.end(), frags.begin(), frags.end());
    }
    return out;
}

Multiset symmetric_difference(const std::vector<Multiset>& operands) {
    Multiset out;
    if (!operands.empty()) {
        out.eps_key = operands.front().eps_key;
        out.eps_geom = operands.front().eps_geom;
    }
    std::map<SegmentKey, MultisetEntry> total;
    for (const auto& op : operands) {
        for (const auto& [key, entry] : op.entries) {
            auto& t = total[key];
            if (t.multiplicity == 0) {
                t.representative = entry.representative;
            }
            t.multiplicity += entry.multiplicity;
            t.members.insert(t.members.end(), entry.members.begin(), entry.members.end());
        }
    }
    // Minimality: distinct keys must be interior-disjoint.
    std::vector<const std::pair<const SegmentKey, MultisetEntry>*> items;
    for (const auto& kv : total) items.push_back(&kv);
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            if (items[i]->first.kind != items[j]->first.kind) continue;
            if (partially_overlap(items[i]->second.representative, items[j]->second.representative, out.eps_geom)) {
                const auto name = [](const MultisetEntry& e) {
                    return e.members.empty() ? std::string("?") : e.members.front().source_id;
                };
                throw Error(ErrorCode::NonMinimalOperands, "segments from " + name(items[i]->second) + " and " +
                                                               name(items[j]->second) + " partially overlap");
            }
        }
    }
    for (auto& [key, entry] : total) {
        if (entry.multiplicity % 2 == 1) {
            entry.multiplicity = 1;
            out.entries.emplace(key, std::move(entry));
        }
    }
    return out;
}

FlattenResult flatten_with_provenance(const HierarchicalSketch& sketch) {
    const double extent = scale_of(hierarchical_extent(sketch));
    const double eps_key = kKeyEpsRelative * extent;
    const double eps = geom_eps(extent);
    const auto faces = decompose(sketch);

    std::vector<Multiset> face_sets;
    for (const auto& face : faces) {
        std::vector<Multiset> loop_sets;
        for (const auto& loop : face) {
            Multiset m{eps_key, eps, {}};
            for (const auto& seg : loop) m.add(seg);
            loop_sets.push_back(std::move(m));
        }
        if (loop_sets.empty()) {
            face_sets.push_back(Multiset{eps_key, eps, {}});
        } else {
            face_sets.push_back(symmetric_difference(loop_sets));
        }
    }
    Multiset result = face_sets.empty() ? Multiset{eps_key, eps, {}} : symmetric_difference(face_sets);

    FlattenResult out;
    out.sketch.plane = sketch.plane;
    int counters[3] = {0, 0, 0};
    for (const auto& [key, entry] : result.entries) {
        const char* prefix = key.kind == PrimitiveKind::Line ? "L" : key.kind == PrimitiveKind::Circle ? "C" : "A";
        const std::string id = prefix + std::to_string(++counters[static_cast<int>(key.kind)]);
        out.sketch.primitives.push_back(Primitive{id, entry.representative});
        for (const auto& m : entry.members) {
            Fragment frag{id, m.fragment, m.fragment_count, false};
            if (key.kind != PrimitiveKind::Circle) {
                const Vec2 s = curve_start(m.source_directed());
                frag.reversed =
                    (s - curve_end(entry.representative)).norm() < (s - curve_start(entry.representative)).norm();
            }
            auto& list = out.provenance[m.source_id];
            const bool seen = std::any_of(list.begin(), list.end(), [&](const Fragment& f) {
                return f.id == frag.id && f.index == frag.index;
            });
            if (!seen) list.push_back(frag);
        }
    }
    for (auto& [src, list] : out.provenance) {
        std::sort(list.begin(), list.end(),
                  [](const Fragment& a, const Fragment& b) { return std::tie(a.index, a.id) < std::tie(b.index, b.id); });
    }
    return out;
}

Sketch flatten_sketch(const HierarchicalSketch& sketch) { return flatten_with_provenance(sketch).sketch; }

Constraint canonical_constraint(const Constraint& c) {
    Constraint out = c;
    if (constraint_is_symmetric(c.kind) && out.refs.size() == 2 && out.refs[1] < out.refs[0]) {
        std::swap(out.refs[0], out.refs[1]);
    }
    return out;
}

namespace {

struct ConstraintSet {
    std::vector<Constraint> seen;

    bool insert(const Constraint& c) {
        const Constraint k = canonical_constraint(c);
        if (std::find(seen.begin(), seen.end(), k) != seen.end()) return false;
        seen.push_back(k);
        return true;
    }
};

std::vector<Ref> map_ref(const Ref& ref, const Provenance& provenance) {
    std::vector<Ref> out;
    const auto it = provenance.find(ref.id);
    if (it == provenance.end()) return out;
    for (const auto& frag : it->second) {
        switch (ref.anchor) {
        case Anchor::Whole:
        case Anchor::Center: out.push_back({frag.id, ref.anchor}); break;
        case Anchor::Start:
            if (frag.index == 0) out.push_back({frag.id, frag.reversed ? Anchor::End : Anchor::Start});
            break;
        case Anchor::End:
            if (frag.index + 1 == frag.count) out.push_back({frag.id, frag.reversed ? Anchor::Start : Anchor::End});
            break;
        }
    }
    return out;
}

}  // namespace

std::vector<Constraint> migrate_constraints(const std::vector<Constraint>& source, const Provenance& provenance) {
    std::vector<Constraint> out;
    ConstraintSet set;
    for (const auto& c : source) {
        std::vector<std::vector<Ref>> options;
        for (const auto& r : c.refs) options.push_back(map_ref(r, provenance));
        if (options.empty() || std::any_of(options.begin(), options.end(), [](const auto& o) { return o.empty(); })) {
            continue;
        }
        // Cartesian product over the (at most two) refs.
        std::vector<std::size_t> idx(options.size(), 0);
        while (true) {
            Constraint m{c.kind, {}, {}};
            for (std::size_t k = 0; k < options.size(); ++k) m.refs.push_back(options[k][idx[k]]);
            const bool self = m.refs.size() == 2 && m.refs[0].id == m.refs[1].id;
            if (!self && set.insert(m)) out.push_back(std::move(m));
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == options[k].size()) {
                idx[k] = 0;
                ++k;
            }
            if (k == idx.size()) break;
        }
    }
    return out;
}

std::vector<Constraint> add_auxiliary_constraints(const Sketch& sketch, const Provenance& provenance) {
    const double eps = geom_eps(scale_of(sketch_extent(sketch)));
    ConstraintSet set;
    for (const auto& c : sketch.constraints) set.insert(c);
    std::vector<Constraint> out;
    const auto add = [&](Constraint c) {
        if (set.insert(c)) out.push_back(std::move(c));
    };
    for (const auto& [src, frags] : provenance) {
        for (std::size_t i = 0; i + 1 < frags.size(); ++i) {
            const Fragment& a = frags[i];
            const Fragment& b = frags[i + 1];
            if (a.id == b.id || a.count < 2) continue;
            const Primitive* pa = sketch.find(a.id);
            const Primitive* pb = sketch.find(b.id);
            if (pa == nullptr || pb == nullptr || pa->kind() != pb->kind()) continue;
            if (b.index == a.index + 1) {
                const Ref ra{a.id, a.reversed ? Anchor::Start : Anchor::End};
                const Ref rb{b.id, b.reversed ? Anchor::End : Anchor::Start};
                const auto qa = anchor_point(pa->curve, ra.anchor);
                const auto qb = anchor_point(pb->curve, rb.anchor);
                if (qa && qb && (*qa - *qb).norm() <= eps) {
                    add(Constraint{ConstraintKind::Coincident, {ra, rb}, {}});
                }
            }
            if (pa->kind() == PrimitiveKind::Line) {
                add(Constraint{ConstraintKind::Parallel, {{a.id, Anchor::Whole}, {b.id, Anchor::Whole}}, {}});
            } else if (pa->kind() == PrimitiveKind::Arc) {
                add(Constraint{ConstraintKind::Equal, {{a.id, Anchor::Whole}, {b.id, Anchor::Whole}}, {}});
            }
        }
    }
    return out;
}

namespace {

double abs_residual(const Constraint& c, const Sketch& sketch) {
    const auto r = residual(c, sketch);
    double m = 0.0;
    for (const double v : r) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

PruneResult prune_constraints(const Sketch& sketch) {
    PruneResult result;
    result.sketch = sketch;
    std::vector<bool> keep(sketch.constraints.size(), true);
    const auto drop = [&](std::size_t i, const std::string& reason) {
        if (!keep[i]) return;
        keep[i] = false;
        result.log.push_back({sketch.constraints[i], reason});
    };
    const auto& cs = sketch.constraints;

    ConstraintSet seen;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (!seen.insert(cs[i])) drop(i, "duplicate");
    }

    // Contradictory pairs on the same referents.
    const auto resolve = [&](ConstraintKind first, ConstraintKind second, bool same_refs) {
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (!keep[i] || cs[i].kind != first) continue;
            for (std::size_t j = 0; j < cs.size(); ++j) {
                if (!keep[j] || cs[j].kind != second) continue;
                const bool match = same_refs ? canonical_constraint({first, cs[j].refs, {}}).refs ==
                                                   canonical_constraint({first, cs[i].refs, {}}).refs
                                             : false;
                if (!match) continue;
                double ri = 0.0, rj = 0.0;
                try {
                    ri = abs_residual(cs[i], sketch);
                    rj = abs_residual(cs[j], sketch);
                } catch (const Error&) {
                    continue;  // degenerate geometry: no analytic contradiction
                }
                const std::string why = std::string("contradicts ") +
                                        std::string(constraint_kind_name(ri > rj ? second : first)) +
                                        "; larger residual";
                if (ri > rj) {
                    drop(i, why);
                    break;
                }
                drop(j, why);
            }
        }
    };
    resolve(ConstraintKind::Horizontal, ConstraintKind::Vertical, true);
    resolve(ConstraintKind::Parallel, ConstraintKind::Perpendicular, true);

    std::set<std::string> horizontal, vertical;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (!keep[i]) continue;
        if (cs[i].kind == ConstraintKind::Horizontal) horizontal.insert(cs[i].refs.at(0).id);
        if (cs[i].kind == ConstraintKind::Vertical) vertical.insert(cs[i].refs.at(0).id);
    }
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (!keep[i] || cs[i].refs.size() != 2) continue;
        const std::string& a = cs[i].refs[0].id;
        const std::string& b = cs[i].refs[1].id;
        if (cs[i].kind == ConstraintKind::Parallel &&
            ((horizontal.count(a) && horizontal.count(b)) || (vertical.count(a) && vertical.count(b)))) {
            drop(i, "implied by horizontal/vertical");
        } else if (cs[i].kind == ConstraintKind::Perpendicular &&
                   ((horizontal.count(a) && vertical.count(b)) || (vertical.count(a) && horizontal.count(b)))) {
            drop(i, "implied by horizontal/vertical");
        }
    }

    result.sketch.constraints.clear();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (keep[i]) result.sketch.constraints.push_back(cs[i]);
    }
    return result;
}

FlattenedPart flatten_part(const HierarchicalSketch& sketch) {
    FlattenResult flat = flatten_with_provenance(sketch);
    Sketch& s = flat.sketch;
    for (auto& c : migrate_constraints(sketch.constraints, flat.provenance)) {
        const Primitive* prim = s.find(c.refs.at(0).id);
        std::vector<RefShape> shapes;
        for (const auto& r : c.refs) shapes.push_back({s.find(r.id)->kind(), r.anchor});
        if (!constraint_shape_legal(c.kind, shapes)) continue;
        if (c.kind == ConstraintKind::Fix) {
            c.values = fix_values_for(prim->curve, c.refs[0].anchor);
        }
        s.constraints.push_back(std::move(c));
    }
    for (auto& c : add_auxiliary_constraints(s, flat.provenance)) {
        s.constraints.push_back(std::move(c));
    }
    PruneResult pruned = prune_constraints(s);
    return FlattenedPart{std::move(pruned.sketch), std::move(flat.provenance), std::move(pruned.log)};
}

Document flatten_import(const HierarchicalImport& data, std::vector<PruneLogEntry>* prune_log) {
    Document doc;
    doc.metadata.source = data.source;
    for (std::size_t i = 0; i < data.sketches.size(); ++i) {
        FlattenedPart fp = flatten_part(data.sketches[i]);
        if (prune_log != nullptr) {
            prune_log->insert(prune_log->end(), fp.prune_log.begin(), fp.prune_log.end());
        }
        Part part;
        part.sketch = std::move(fp.sketch);
        part.extrusion = i < data.extrusions.size() ? data.extrusions[i] : Extrusion{LinearExtrusion{}};
        part.boolean = i < data.booleans.size() ? data.booleans[i] : BooleanKind::NewBody;
        doc.parts.push_back(std::move(part));
    }
    return doc;
}

}  // namespace histcad
