#pragma once

// Structural validators for emitted artifacts: an XML well-formedness
// check sized for our SVG output, and a validator for the JSON-schema
// subset the shipped schemas use (type, enum, properties, required,
// additionalProperties, items, minItems).

#include <cctype>
#include <string>
#include <vector>

#include <json.hpp>

namespace testsupport {

// True iff `text` is a single well-formed XML document: balanced matching
// tags, quoted attributes, no stray '<' or '&' in character data.
inline bool xml_well_formed(const std::string& text, std::string* error = nullptr) {
  const auto fail = [&](const std::string& why, std::size_t at) {
    if (error) *error = why + " at byte " + std::to_string(at);
    return false;
  };
  std::vector<std::string> stack;
  std::size_t i = 0;
  const std::size_t n = text.size();
  bool seen_root = false;

  const auto entity_ok = [&](std::size_t& pos) {
    static const char* names[] = {"&amp;", "&lt;", "&gt;", "&quot;", "&apos;"};
    for (const char* e : names) {
      const std::size_t len = std::string(e).size();
      if (text.compare(pos, len, e) == 0) {
        pos += len;
        return true;
      }
    }
    if (text.compare(pos, 2, "&#") == 0) {
      std::size_t p = pos + 2;
      while (p < n && std::isdigit(static_cast<unsigned char>(text[p]))) ++p;
      if (p > pos + 2 && p < n && text[p] == ';') {
        pos = p + 1;
        return true;
      }
    }
    return false;
  };

  while (i < n) {
    if (text[i] == '<') {
      if (text.compare(i, 4, "<!--") == 0) {
        const std::size_t end = text.find("-->", i + 4);
        if (end == std::string::npos) return fail("unterminated comment", i);
        i = end + 3;
        continue;
      }
      if (text.compare(i, 2, "<?") == 0) {
        const std::size_t end = text.find("?>", i + 2);
        if (end == std::string::npos) return fail("unterminated processing instruction", i);
        i = end + 2;
        continue;
      }
      const bool closing = i + 1 < n && text[i + 1] == '/';
      std::size_t p = i + (closing ? 2 : 1);
      std::size_t name_start = p;
      while (p < n && (std::isalnum(static_cast<unsigned char>(text[p])) || text[p] == ':' ||
                       text[p] == '-' || text[p] == '_'))
        ++p;
      if (p == name_start) return fail("empty tag name", i);
      const std::string name = text.substr(name_start, p - name_start);

      // attributes
      bool self_closing = false;
      while (p < n && text[p] != '>') {
        if (std::isspace(static_cast<unsigned char>(text[p]))) {
          ++p;
          continue;
        }
        if (text[p] == '/' && p + 1 < n && text[p + 1] == '>') {
          self_closing = true;
          ++p;
          continue;
        }
        if (closing) return fail("closing tag with attributes", p);
        std::size_t a = p;
        while (p < n && text[p] != '=' && !std::isspace(static_cast<unsigned char>(text[p])) &&
               text[p] != '>')
          ++p;
        if (p == a) return fail("bad attribute name", p);
        while (p < n && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
        if (p >= n || text[p] != '=') return fail("attribute without '='", p);
        ++p;
        while (p < n && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
        if (p >= n || (text[p] != '"' && text[p] != '\'')) return fail("unquoted attribute", p);
        const char quote = text[p++];
        while (p < n && text[p] != quote) {
          if (text[p] == '<') return fail("raw '<' in attribute value", p);
          if (text[p] == '&') {
            if (!entity_ok(p)) return fail("bad entity in attribute", p);
            continue;
          }
          ++p;
        }
        if (p >= n) return fail("unterminated attribute value", p);
        ++p;
      }
      if (p >= n) return fail("unterminated tag", i);
      if (closing) {
        if (self_closing) return fail("malformed closing tag", i);
        if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">", i);
        stack.pop_back();
      } else if (!self_closing) {
        stack.push_back(name);
        seen_root = true;
      } else {
        seen_root = true;
      }
      i = p + 1;
    } else if (text[i] == '&') {
      if (!entity_ok(i)) return fail("bad entity in text", i);
    } else if (text[i] == '>') {
      return fail("stray '>'", i);
    } else {
      ++i;
    }
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">", n);
  if (!seen_root) return fail("no root element", 0);
  return true;
}

// Validator for the schema subset used in schemas/.
inline bool schema_validate(const nlohmann::json& doc, const nlohmann::json& schema,
                            std::string* error = nullptr, const std::string& path = "$") {
  const auto fail = [&](const std::string& why) {
    if (error) *error = path + ": " + why;
    return false;
  };

  if (schema.contains("enum")) {
    for (const auto& v : schema.at("enum"))
      if (doc == v) return true;
    return fail("value not in enum");
  }

  if (schema.contains("type")) {
    const auto matches = [&](const std::string& t) {
      if (t == "object") return doc.is_object();
      if (t == "array") return doc.is_array();
      if (t == "string") return doc.is_string();
      if (t == "integer") return doc.is_number_integer() || doc.is_number_unsigned();
      if (t == "number") return doc.is_number();
      if (t == "boolean") return doc.is_boolean();
      if (t == "null") return doc.is_null();
      return false;
    };
    const auto& ty = schema.at("type");
    bool ok = false;
    if (ty.is_string()) {
      ok = matches(ty.get<std::string>());
    } else {
      for (const auto& t : ty)
        if (matches(t.get<std::string>())) ok = true;
    }
    if (!ok) return fail("type mismatch");
  }

  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema.at("required"))
        if (!doc.contains(key.get<std::string>()))
          return fail("missing required key '" + key.get<std::string>() + "'");
    const bool closed = schema.contains("additionalProperties") &&
                        schema.at("additionalProperties").is_boolean() &&
                        !schema.at("additionalProperties").get<bool>();
    for (const auto& [key, value] : doc.items()) {
      const bool described = schema.contains("properties") && schema.at("properties").contains(key);
      if (described) {
        if (!schema_validate(value, schema.at("properties").at(key), error, path + "." + key))
          return false;
      } else if (closed) {
        return fail("unexpected key '" + key + "'");
      }
    }
  }

  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema.at("minItems").get<std::size_t>())
      return fail("fewer than minItems elements");
    if (schema.contains("items")) {
      std::size_t idx = 0;
      for (const auto& v : doc) {
        if (!schema_validate(v, schema.at("items"), error,
                             path + "[" + std::to_string(idx) + "]"))
          return false;
        ++idx;
      }
    }
  }
  return true;
}

}  // namespace testsupport
