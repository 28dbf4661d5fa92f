#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pathmix/experiments.hpp"
#include "pathmix/model_selection.hpp"
#include "pathmix/models.hpp"
#include "pathmix/sampling.hpp"

namespace pathmix {

/**
 * JSON layouts carry format_version (shape) and library_version
 * (provenance). Doubles are emitted shortest-round-trip, so
 * write -> read -> write is byte-stable. Non-finite values (possible in
 * ratio fields) serialize as null per JSON rules.
 */
nlohmann::json to_json(const FittedModel& m);
FittedModel model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const McSummary& s);
nlohmann::json to_json(const PpcReport& r);
nlohmann::json to_json(const SparsityReport& r);
nlohmann::json to_json(const LlrReport& r);
nlohmann::json to_json(const BootstrapLlr& b);
nlohmann::json to_json(const SynthConfig& cfg);
nlohmann::json to_json(const SweepTable& t);
nlohmann::json to_json(const std::vector<PpcStudyRow>& rows);

/** CSV mirrors with fixed column order (documented in the README). */
std::string sweep_csv(const SweepTable& t);
std::string ppc_rows_csv(const std::vector<PpcStudyRow>& rows);
std::string replicate_values_csv(const std::vector<double>& values);

/** Refuses to overwrite an existing file unless force is set (DataError). */
void write_text_file(const std::string& path, const std::string& content, bool force);
std::string read_text_file(const std::string& path);

}  // namespace pathmix
