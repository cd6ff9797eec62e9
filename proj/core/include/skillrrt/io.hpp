#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skillrrt/connector.hpp"
#include "skillrrt/filtering.hpp"
#include "skillrrt/planner.hpp"

namespace skillrrt {

/// Provenance stamped into every artifact.
struct ArtifactMeta {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string tool_version;
};

std::string ToolVersion();
/// 64-bit FNV-1a of the text, as 16 lowercase hex digits.
std::string ConfigHash(const std::string& text);

struct LoadedPlan {
  std::string id;
  SkillPlan plan;
  ArtifactMeta meta;
};

/// Plan documents round-trip bit-exactly. Parsing errors raise IoError.
std::string PlanToJson(const SkillPlan& plan, const std::string& plan_id, const ArtifactMeta& meta);
LoadedPlan PlanFromJson(const std::string& text);

std::string ReplayReportToJson(const ReplayReport& report, const ArtifactMeta& meta);
ReplayReport ReplayReportFromJson(const std::string& text);

/// Single-line JSON documents for JSON-lines files.
std::string ConnectorProblemToJsonLine(const ConnectorProblem& problem, const ArtifactMeta& meta);
ConnectorProblem ConnectorProblemFromJsonLine(const std::string& line);
std::string DatasetRecordToJsonLine(const DatasetRecord& record, const ArtifactMeta& meta);
DatasetRecord DatasetRecordFromJsonLine(const std::string& line);

/// Kept-plan manifest written by the filter command.
std::string ManifestToJson(const std::vector<std::string>& kept, double m, std::size_t n_replays,
                           const ArtifactMeta& meta);
std::vector<std::string> ManifestFromJson(const std::string& text);

std::string ReadTextFile(const std::string& path);
/// Creates or truncates the file. Failures raise IoError.
void WriteTextFile(const std::string& path, const std::string& text);
std::vector<std::string> ReadLines(const std::string& path);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string CsvField(const std::string& value);
/// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double value);

}  // namespace skillrrt
