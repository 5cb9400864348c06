#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "ucode/container.hpp"
#include "ucode/engine.hpp"
#include "ucode/heatmap.hpp"

namespace ucode {

using json = nlohmann::ordered_json;

// Update files as JSON. Numbers are written as hex strings; the reader
// accepts hex strings or plain integers. A "text" member per triad holds the
// disassembly for humans and is ignored on input.
json update_to_json(const UpdateFile& update);
/// Throws Error{Syntax} for missing or malformed members.
UpdateFile update_from_json(const json& j);

json fault_to_json(const Fault& fault);
json trace_record_to_json(const TraceRecord& record);
/// One JSON object per line.
std::string trace_to_jsonl(const std::vector<TraceRecord>& trace);

// Macro-context description: {"macro": name} picks a toy ROM context;
// optional "entry", "operand1", "operand2", "bytes" (hex string), "address"
// and "count" override or supply the fields.
/// Throws Error{Syntax} or Error{UnknownMnemonic}.
MacroContext context_from_json(const json& j);
json context_to_json(const MacroContext& ctx);

/// Machine-readable dump of every encoding table the codec uses.
json export_tables_json();
/// FNV-1a over the compact dump of export_tables_json().
std::uint32_t tables_checksum();

}  // namespace ucode
