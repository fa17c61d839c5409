// Small builders shared across test files.
#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "waf/dataset.hpp"
#include "waf/schema.hpp"

namespace fixtures {

// One ±1 attribute, two classes: the smallest schema the validators accept.
inline waf::AttributeSchema binary_schema() {
  waf::AttributeSchema schema;
  schema.attributes = {{"Sex", "Male"}};
  schema.classes = {"Pos", "Neg"};
  return schema;
}

inline waf::AttributeSchema pair_schema() {
  waf::AttributeSchema schema;
  schema.attributes = {{"AgeGroup", "20-35"}, {"Sex", "Male"}};
  schema.classes = {"Pos", "Neg"};
  return schema;
}

inline waf::PredictionRecord make_record(
    std::string id, std::string label, std::vector<double> probs,
    std::map<std::string, std::string> attrs,
    std::vector<double> embedding = {}) {
  waf::PredictionRecord r;
  r.id = std::move(id);
  r.true_label = std::move(label);
  r.probs = Eigen::Map<waf::Vector>(probs.data(),
                                    static_cast<Eigen::Index>(probs.size()));
  r.attrs = std::move(attrs);
  if (!embedding.empty())
    r.embedding = Eigen::Map<waf::Vector>(
        embedding.data(), static_cast<Eigen::Index>(embedding.size()));
  return r;
}

// Attribute values for the built-in default schema, chosen by sign.
inline std::map<std::string, std::string> default_attrs(bool age, bool eth,
                                                        bool race, bool sex) {
  return {{"AgeGroup", age ? "20-35" : "other"},
          {"Ethnicity", eth ? "Not Hispanic" : "Hispanic"},
          {"Race", race ? "Caucasian" : "African American"},
          {"Sex", sex ? "Male" : "Female"}};
}

// Unique scratch directory, removed when the fixture leaves scope.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("waf_" + tag + "_" + std::to_string(rd()) + "_" +
             std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace fixtures
