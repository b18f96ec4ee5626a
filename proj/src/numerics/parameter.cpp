// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/numerics/parameter.hpp"

#include <stdexcept>

namespace sambamixer::numerics {

Parameter& ParameterSet::add(std::string name, Tensor value) {
  if (find(name) != nullptr) throw std::logic_error("duplicate parameter name: " + name);
  params_.push_back(std::make_unique<Parameter>(Parameter{std::move(name), std::move(value)}));
  return *params_.back();
}

Parameter* ParameterSet::find(const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

std::size_t ParameterSet::element_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

std::vector<Parameter*> ParameterSet::pointers() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

}  // namespace sambamixer::numerics
