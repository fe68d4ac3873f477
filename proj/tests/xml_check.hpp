#pragma once

// Minimal well-formedness check for the generated SVG: balanced tags,
// quoted attributes, escaped text. Not a general XML parser.

#include <cctype>
#include <string>
#include <vector>

namespace eadlab::testing {

inline bool xml_well_formed(const std::string& s, std::string* why = nullptr) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool seen_root = false;
  while (i < s.size()) {
    if (s[i] != '<') {
      if (s[i] == '>') return fail("stray '>'");
      if (s[i] == '&') {
        const auto semi = s.find(';', i);
        if (semi == std::string::npos) return fail("unterminated entity");
        const std::string ent = s.substr(i, semi - i + 1);
        if (ent != "&amp;" && ent != "&lt;" && ent != "&gt;" && ent != "&quot;" && ent != "&apos;")
          return fail("unknown entity " + ent);
      } else if (stack.empty() && !std::isspace(static_cast<unsigned char>(s[i]))) {
        return fail("text outside the root element");
      }
      ++i;
      continue;
    }
    if (s.compare(i, 2, "<?") == 0) {
      const auto end = s.find("?>", i);
      if (end == std::string::npos) return fail("unterminated declaration");
      i = end + 2;
      continue;
    }
    const bool closing = i + 1 < s.size() && s[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    std::size_t name_start = j;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '-' || s[j] == ':' || s[j] == '_'))
      ++j;
    const std::string name = s.substr(name_start, j - name_start);
    if (name.empty()) return fail("empty tag name");
    bool self_closing = false;
    while (j < s.size() && s[j] != '>') {
      if (s[j] == '"') {
        const auto q = s.find('"', j + 1);
        if (q == std::string::npos) return fail("unterminated attribute");
        if (s.substr(j + 1, q - j - 1).find('<') != std::string::npos) return fail("'<' in attribute");
        j = q + 1;
        continue;
      }
      if (s[j] == '/' && j + 1 < s.size() && s[j + 1] == '>') self_closing = true;
      if (s[j] == '<') return fail("'<' inside tag");
      ++j;
    }
    if (j >= s.size()) return fail("unterminated tag");
    if (closing) {
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
      stack.pop_back();
    } else if (!self_closing) {
      if (stack.empty() && seen_root) return fail("second root element");
      seen_root = true;
      stack.push_back(name);
    }
    i = j + 1;
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
  if (!seen_root) return fail("no root element");
  return true;
}

}  // namespace eadlab::testing
