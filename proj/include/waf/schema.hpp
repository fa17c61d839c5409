#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace waf {

// Error type for every contract violation surfaced by the library.
class AuditError : public std::runtime_error {
 public:
  explicit AuditError(const std::string& what) : std::runtime_error(what) {}
};

// Ordered demographic attributes (with the value encoded as privileged/+1)
// and the ordered class list of the audited task.
struct AttributeSchema {
  // (name, privileged value) pairs; order fixes column order everywhere.
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<std::string> classes;

  std::size_t n_attributes() const { return attributes.size(); }
  std::size_t n_classes() const { return classes.size(); }

  int class_index(const std::string& label) const {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end())
      throw AuditError("unknown class label '" + label + "'");
    return static_cast<int>(it - classes.begin());
  }

  int attribute_index(const std::string& name) const {
    for (std::size_t j = 0; j < attributes.size(); ++j)
      if (attributes[j].first == name) return static_cast<int>(j);
    throw AuditError("unknown attribute '" + name + "'");
  }

  void validate() const {
    if (classes.size() < 2) throw AuditError("schema needs at least 2 classes");
    std::unordered_set<std::string> seen;
    for (const auto& c : classes) {
      if (c.empty()) throw AuditError("empty class name in schema");
      if (!seen.insert(c).second)
        throw AuditError("duplicate class name '" + c + "'");
    }
    seen.clear();
    for (const auto& [name, priv] : attributes) {
      if (name.empty()) throw AuditError("empty attribute name in schema");
      if (priv.empty())
        throw AuditError("attribute '" + name + "' has empty privileged value");
      if (!seen.insert(name).second)
        throw AuditError("duplicate attribute name '" + name + "'");
    }
  }
};

// CREMA-D-like default: six emotion classes, four demographic attributes
// (alphabetical order; privileged values per the audited models' convention).
inline AttributeSchema default_schema() {
  AttributeSchema s;
  s.attributes = {{"AgeGroup", "20-35"},
                  {"Ethnicity", "Not Hispanic"},
                  {"Race", "Caucasian"},
                  {"Sex", "Male"}};
  s.classes = {"Anger", "Disgust", "Fear", "Happy", "Neutral", "Sad"};
  return s;
}

}  // namespace waf
