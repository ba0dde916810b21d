#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lada/tensor.hpp"

namespace lada {

struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

/// Named parameter tensors in a fixed insertion order (the order determines
/// checkpoint layout and optimizer iteration order).
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Shape shape, std::vector<double> values);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace lada
