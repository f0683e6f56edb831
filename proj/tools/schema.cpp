#include "schema.hpp"

#include "config_schema_text.hpp"

#include <sconvex/core.hpp>

#include <sstream>

namespace sconvex::cli {

using nlohmann::json;

const json& config_schema() {
  static const json schema = json::parse(kConfigSchemaText);
  return schema;
}

namespace {

std::string type_name(const json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
  if (v.is_number_float()) return "number";
  return v.type_name();
}

bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "integer") {
    return v.is_number_integer() || v.is_number_unsigned() ||
           (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  }
  if (t == "number") return v.is_number();
  if (t == "null") return v.is_null();
  return false;
}

// Line of the last key of `keys` in `text`, searching each key after the
// previous one; array indices are skipped.
int locate_line(const std::string& text, const std::vector<std::string>& keys) {
  if (text.empty()) return 0;
  std::size_t pos = 0;
  bool found = false;
  for (const auto& k : keys) {
    if (!k.empty() && k.front() == '[') continue;
    const auto at = text.find("\"" + k + "\"", pos);
    if (at == std::string::npos) break;
    pos = at + 1;
    found = true;
  }
  if (!found) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class Validator {
 public:
  Validator(const json& root, const std::string& text) : root_(root), text_(text) {}

  void check(const json& v, const json& schema, std::vector<std::string>& path) {
    const json& s = resolve(schema);
    if (s.contains("enum")) {
      bool ok = false;
      for (const auto& e : s["enum"]) ok = ok || e == v;
      if (!ok) {
        std::vector<std::string> opts;
        for (const auto& e : s["enum"]) opts.push_back(e.dump());
        std::string joined;
        for (std::size_t i = 0; i < opts.size(); ++i) joined += (i ? ", " : "") + opts[i];
        report(path, "value " + v.dump() + " is not one of " + joined);
      }
      return;
    }
    if (s.contains("type")) {
      const std::string t = s["type"].get<std::string>();
      if (!has_type(v, t)) {
        report(path, "expected " + t + ", got " + type_name(v));
        return;
      }
    }
    if (v.is_number()) {
      const double x = v.get<double>();
      if (s.contains("minimum") && x < s["minimum"].get<double>()) {
        report(path, "must be >= " + s["minimum"].dump());
      }
      if (s.contains("maximum") && x > s["maximum"].get<double>()) {
        report(path, "must be <= " + s["maximum"].dump());
      }
      if (s.contains("exclusiveMinimum") && !(x > s["exclusiveMinimum"].get<double>())) {
        report(path, "must be > " + s["exclusiveMinimum"].dump());
      }
    }
    if (v.is_array()) {
      if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) {
        report(path, "needs at least " + s["minItems"].dump() + " items");
      }
      if (s.contains("items")) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          path.push_back("[" + std::to_string(i) + "]");
          check(v[i], s["items"], path);
          path.pop_back();
        }
      }
    }
    if (v.is_object()) {
      const json empty = json::object();
      const json& props = s.contains("properties") ? s["properties"] : empty;
      if (s.contains("required")) {
        for (const auto& r : s["required"]) {
          if (!v.contains(r.get<std::string>())) {
            report(path, "missing required field '" + r.get<std::string>() + "'");
          }
        }
      }
      const bool closed = s.contains("additionalProperties") && s["additionalProperties"] == false;
      for (auto it = v.begin(); it != v.end(); ++it) {
        path.push_back(it.key());
        if (props.contains(it.key())) {
          check(it.value(), props[it.key()], path);
        } else if (closed) {
          report(path, "unknown field '" + it.key() + "'");
        }
        path.pop_back();
      }
    }
  }

  std::vector<SchemaIssue> issues;

 private:
  const json& resolve(const json& s) const {
    if (!s.contains("$ref")) return s;
    const std::string ref = s["$ref"].get<std::string>();
    const std::string prefix = "#/definitions/";
    if (ref.rfind(prefix, 0) != 0) throw ConfigError("unsupported schema reference " + ref);
    return root_.at("definitions").at(ref.substr(prefix.size()));
  }

  void report(const std::vector<std::string>& path, const std::string& msg) {
    std::string dotted;
    for (const auto& p : path) {
      if (!p.empty() && p.front() == '[') {
        dotted += p;
      } else {
        dotted += (dotted.empty() ? "" : ".") + p;
      }
    }
    issues.push_back({dotted.empty() ? "<root>" : dotted, locate_line(text_, path), msg});
  }

  const json& root_;
  const std::string& text_;
};

}  // namespace

std::vector<SchemaIssue> validate(const json& doc, const json& schema,
                                  const std::string& source_text) {
  Validator v(schema, source_text);
  std::vector<std::string> path;
  v.check(doc, schema, path);
  return v.issues;
}

json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min(e.byte, text.size());
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": invalid JSON (" << e.what() << ")";
    throw ConfigError(os.str());
  }
}

}  // namespace sconvex::cli
