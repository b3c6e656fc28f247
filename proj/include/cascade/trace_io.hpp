#pragma once

#include "json.hpp"

#include "cascade/cascade.hpp"

namespace cascade {

nlohmann::json label_to_json(const Label& label);
Label label_from_json(const nlohmann::json& j);

// One JSONL line: {sample_id, stopping_index, final_output, total_cost, per_stage}.
// Callers may add further keys (label, query_length, ...) before writing.
nlohmann::json trace_to_json(const ExecutionTrace& trace, int sample_id);
ExecutionTrace trace_from_json(const nlohmann::json& j);

}  // namespace cascade
