#pragma once

// Validation of run configurations against the shipped JSON schema
// (a subset of draft-07: type, enum, properties, required,
// additionalProperties, items, minItems, minimum, maximum,
// exclusiveMinimum and local $ref).

#include <json.hpp>

#include <string>
#include <vector>

namespace sconvex::cli {

struct SchemaIssue {
  std::string path;  // dotted field path, e.g. "certify.r"
  int line = 0;      // 1-based line in the source text, 0 when unknown
  std::string message;
};

// The schema compiled into the binary.
const nlohmann::json& config_schema();

std::vector<SchemaIssue> validate(const nlohmann::json& doc, const nlohmann::json& schema,
                                  const std::string& source_text = "");

// Parses `text`, throwing ConfigError with "line:column" on syntax errors.
nlohmann::json parse_config_text(const std::string& text, const std::string& origin);

}  // namespace sconvex::cli
