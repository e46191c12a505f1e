#pragma once

#include "histcad/relations.hpp"
#include "histcad/topology.hpp"

#include <optional>
#include <string>
#include <vector>

namespace histcad {

struct PartAnalysis {
    std::size_t index = 0;  // 0-based part index
    LoopResult loops;
    LoopDict dict;
    std::optional<OBB> obb;
    /// "CODE: message" when loop inference or meshing failed; the part then
    /// has no OBB and takes no part in relations.
    std::string error;
};

struct DocumentAnalysis {
    std::vector<PartAnalysis> parts;
    /// Relations between parts that have an OBB, indexed by part.
    RelationTable relations;

    bool ok() const;
};

DocumentAnalysis analyze_document(const Document& doc);

/// Pretty-printed JSON dump of loops, holes, OBBs and relations (schema in
/// docs/format.md). Part and relation indices are 1-based.
std::string analysis_to_json(const DocumentAnalysis& analysis);

}  // namespace histcad
